"""Pipeline orchestration: raw GPS directory in, reports and artifacts out.

Stages run per user (optionally fanned out over a process pool), then the
community stages (POIs, similarity) join over all users. Given the same
input and config, outputs are byte-identical across runs.
"""

from __future__ import annotations

import csv
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from . import reports
from .ingest import DEFAULT_GAP_THRESHOLD_S, discover_users, load_user, segment_trajectories
from .places import (
    DEFAULT_LP_EPS_M,
    DEFAULT_LP_MIN_PTS,
    DEFAULT_POI_EPS_M,
    DEFAULT_POI_MIN_PTS,
    LocationPoint,
    Poi,
    extract_location_points,
    extract_pois,
    user_poi_sets,
)
from .preprocess import DEFAULT_MAX_SPEED_MPS, CleaningReport, clean_trajectories
from .similarity import SimilarityRecord, rank_pairs
from .staypoint import (
    DEFAULT_DIST_THRESHOLD_M,
    DEFAULT_TIME_THRESHOLD_S,
    StayPoint,
    StayPointParams,
    detect_stay_points,
)


class DataError(Exception):
    """The input data is missing or unusable (as opposed to a usage or I/O problem)."""


@dataclass
class PipelineConfig:
    """All knobs in one place; defaults are the standard parameter set
    (30 min gap, 200 m / 20 min dwell, 100 m / 4 places, 200 m / 4 POIs)."""

    data_dir: Path
    output_dir: Path
    users: list[str] | None = None
    gap_threshold_s: float = DEFAULT_GAP_THRESHOLD_S
    v_max_mps: float = DEFAULT_MAX_SPEED_MPS
    stay_dist_m: float = DEFAULT_DIST_THRESHOLD_M
    stay_time_s: float = DEFAULT_TIME_THRESHOLD_S
    anchored: bool = False
    lp_eps_m: float = DEFAULT_LP_EPS_M
    lp_min_pts: int = DEFAULT_LP_MIN_PTS
    poi_eps_m: float = DEFAULT_POI_EPS_M
    poi_min_pts: int = DEFAULT_POI_MIN_PTS
    min_users: int = 1
    strict_parse: bool = False
    jobs: int = 1
    top_pairs: int = 10

    def __post_init__(self) -> None:
        for name in ("gap_threshold_s", "v_max_mps", "stay_dist_m", "stay_time_s",
                     "lp_eps_m", "poi_eps_m"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        for name in ("lp_min_pts", "poi_min_pts", "min_users", "jobs"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be at least 1")


@dataclass
class UserResult:
    user_id: str
    n_trajectories: int
    n_gps_points: int
    stay_points: list[StayPoint]
    location_points: list[LocationPoint]
    cleaning: CleaningReport
    invalid_lines: int


@dataclass(frozen=True)
class UserStats:
    user_id: str
    trajectories: int
    gps_points: int
    stay_points: int
    location_points: int


@dataclass
class PipelineSummary:
    """Per-user counts ranked by stay points, plus community-level results."""

    user_stats: list[UserStats]
    total: UserStats
    poi_count: int
    top_pairs: list[SimilarityRecord]
    anchored: bool = False


def process_user_dir(user_dir: str, config: PipelineConfig) -> UserResult:
    """Everything that is independent per user: load, clean, dwell, places."""
    log = load_user(user_dir, strict=config.strict_parse)
    trajectories = segment_trajectories(log, config.gap_threshold_s)
    cleaned, cleaning = clean_trajectories(trajectories, config.v_max_mps)
    sp_params = StayPointParams(
        dist_threshold_m=config.stay_dist_m,
        time_threshold_s=config.stay_time_s,
        anchored=config.anchored,
    )
    stay_points: list[StayPoint] = []
    for traj in cleaned:
        stay_points.extend(detect_stay_points(traj, sp_params))
    location_points = extract_location_points(stay_points, config.lp_eps_m, config.lp_min_pts)
    return UserResult(
        user_id=log.user_id,
        n_trajectories=len(trajectories),
        n_gps_points=len(log.fixes),
        stay_points=stay_points,
        location_points=location_points,
        cleaning=cleaning,
        invalid_lines=log.invalid_lines,
    )


def _process_star(args: tuple[str, PipelineConfig]) -> UserResult:
    return process_user_dir(*args)


def _select_user_dirs(config: PipelineConfig) -> list[Path]:
    dirs = discover_users(config.data_dir)
    if config.users is not None:
        wanted = set(config.users)
        found = {d.name for d in dirs}
        missing = sorted(wanted - found)
        if missing:
            raise DataError(f"requested users not in data directory: {', '.join(missing)}")
        dirs = [d for d in dirs if d.name in wanted]
    if not dirs:
        raise DataError(f"no users found under {config.data_dir}")
    return dirs


def run_pipeline(config: PipelineConfig) -> PipelineSummary:
    """Run every stage and write all artifacts into config.output_dir.

    Artifacts: fixes are not persisted (use the staged CLI for that);
    staypoints.csv/.geojson, location_points.csv, pois.csv/.geojson,
    similarity.csv, summary.csv, cleaning_report.csv.
    """
    user_dirs = _select_user_dirs(config)
    jobs = [(str(d), config) for d in user_dirs]
    if config.jobs > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            results = list(pool.map(_process_star, jobs))
    else:
        results = [_process_star(job) for job in jobs]
    results.sort(key=lambda r: r.user_id)

    pooled_lps: list[LocationPoint] = []
    for result in results:
        pooled_lps.extend(result.location_points)
    pois = extract_pois(pooled_lps, config.poi_eps_m, config.poi_min_pts, config.min_users)
    sets = user_poi_sets(pois, users=[r.user_id for r in results])
    ranking = rank_pairs(sets) if len(results) >= 2 else []

    summary = _summarize(results, pois, ranking, config.top_pairs)
    summary.anchored = config.anchored
    _write_artifacts(config, results, pooled_lps, pois, ranking)
    return summary


def _summarize(
    results: list[UserResult],
    pois: list[Poi],
    ranking: list[SimilarityRecord],
    top_pairs: int,
) -> PipelineSummary:
    rows = [
        UserStats(
            user_id=r.user_id,
            trajectories=r.n_trajectories,
            gps_points=r.n_gps_points,
            stay_points=len(r.stay_points),
            location_points=len(r.location_points),
        )
        for r in results
    ]
    rows.sort(key=lambda s: (-s.stay_points, s.user_id))
    total = UserStats(
        user_id="TOTAL",
        trajectories=sum(s.trajectories for s in rows),
        gps_points=sum(s.gps_points for s in rows),
        stay_points=sum(s.stay_points for s in rows),
        location_points=sum(s.location_points for s in rows),
    )
    return PipelineSummary(
        user_stats=rows,
        total=total,
        poi_count=len(pois),
        top_pairs=ranking[:top_pairs],
    )


def _write_artifacts(
    config: PipelineConfig,
    results: list[UserResult],
    pooled_lps: list[LocationPoint],
    pois: list[Poi],
    ranking: list[SimilarityRecord],
) -> None:
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)

    all_sps = [sp for r in results for sp in r.stay_points]
    reports.write_staypoints_csv(all_sps, out / "staypoints.csv")
    reports.emit_geojson(reports.staypoint_features(all_sps), out / "staypoints.geojson")
    reports.write_location_points_csv(pooled_lps, out / "location_points.csv")
    reports.write_pois_csv(pois, out / "pois.csv")
    reports.emit_geojson(reports.poi_features(pois), out / "pois.geojson")
    if ranking:
        reports.write_similarity_csv(ranking, out / "similarity.csv")
    _write_summary_csv(results, out / "summary.csv")
    _write_cleaning_csv(results, out / "cleaning_report.csv")


def _write_summary_csv(results: list[UserResult], path: Path) -> None:
    rows = sorted(results, key=lambda r: (-len(r.stay_points), r.user_id))
    with open(path, "w", encoding="utf-8", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["user_id", "trajectories", "gps_points", "stay_points", "location_points"])
        for r in rows:
            out.writerow(
                [r.user_id, r.n_trajectories, r.n_gps_points, len(r.stay_points), len(r.location_points)]
            )
        out.writerow(
            [
                "TOTAL",
                sum(r.n_trajectories for r in results),
                sum(r.n_gps_points for r in results),
                sum(len(r.stay_points) for r in results),
                sum(len(r.location_points) for r in results),
            ]
        )


def _write_cleaning_csv(results: list[UserResult], path: Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(
            [
                "user_id",
                "invalid_lines",
                "fixes_in",
                "fixes_removed_speed",
                "fixes_removed_range",
                "trajectories_dropped_empty",
            ]
        )
        for r in sorted(results, key=lambda r: r.user_id):
            c = r.cleaning
            out.writerow(
                [
                    r.user_id,
                    r.invalid_lines,
                    c.fixes_in,
                    c.fixes_removed_speed,
                    c.fixes_removed_range,
                    c.trajectories_dropped_empty,
                ]
            )


def format_summary(summary: PipelineSummary) -> str:
    """Human-readable run report: ranked per-user table, totals, POIs, top pairs."""
    from .similarity import format_score_2dp

    mode = "anchored" if summary.anchored else "consecutive"
    lines = [f"stay-point mode: {mode}"]
    header = f"{'user':>8} {'trajectories':>13} {'gps_points':>11} {'stay_points':>12} {'location_points':>16}"
    lines.append(header)
    lines.append("-" * len(header))
    for s in summary.user_stats + [summary.total]:
        lines.append(
            f"{s.user_id:>8} {s.trajectories:>13} {s.gps_points:>11} {s.stay_points:>12} {s.location_points:>16}"
        )
    lines.append(f"POIs: {summary.poi_count}")
    if summary.top_pairs:
        lines.append("top similar pairs:")
        for r in summary.top_pairs:
            lines.append(
                f"  {r.user_a} ~ {r.user_b}: {r.shared}/{r.union} = {format_score_2dp(r)}"
            )
    return "\n".join(lines)
