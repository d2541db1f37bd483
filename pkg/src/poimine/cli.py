"""Command-line interface.

Subcommands mirror the pipeline stages; each one consumes the previous
stage's CSV so any stage can be inspected or rerun in isolation, while
``pipeline`` runs everything in memory.

Exit codes: 0 success, 2 usage error, 3 data error, 4 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

from . import reports
from .clustering import k_dist_curve, suggest_eps
from .ingest import (
    DEFAULT_GAP_THRESHOLD_S,
    PltFormatError,
    discover_users,
    load_user,
    segment_trajectories,
)
from .pipeline import DataError, PipelineConfig, format_summary, run_pipeline
from .places import (
    DEFAULT_LP_EPS_M,
    DEFAULT_LP_MIN_PTS,
    DEFAULT_POI_EPS_M,
    DEFAULT_POI_MIN_PTS,
    extract_location_points,
    extract_pois,
    user_poi_sets,
)
from .preprocess import DEFAULT_MAX_SPEED_MPS, clean_trajectories
from .similarity import format_score_2dp, rank_pairs
from .staypoint import (
    DEFAULT_DIST_THRESHOLD_M,
    DEFAULT_TIME_THRESHOLD_S,
    StayPointParams,
    detect_stay_points,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_IO = 4


class UsageError(ValueError):
    """Bad invocation; subclasses ValueError so argparse type hooks report it."""


def parse_duration_s(text: str) -> float:
    """Durations like '20m', '90s', '1.5h'; a bare number means minutes."""
    t = text.strip().lower()
    try:
        for suffix, mult in (("min", 60.0), ("h", 3600.0), ("m", 60.0), ("s", 1.0)):
            if t.endswith(suffix):
                return float(t[: -len(suffix)]) * mult
        return float(t) * 60.0
    except ValueError:
        raise UsageError(f"cannot parse duration: {text!r}") from None


def _parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise UsageError(f"cannot parse boolean: {text!r}")


def _parse_users(text: str) -> list[str]:
    return [u for u in (part.strip() for part in text.split(",")) if u]


# config-file keys -> (argparse dest, converter); keys match the long flags
_CONFIG_KEYS = {
    "data": ("data_dir", str),
    "out": ("out_dir", str),
    "users": ("users", _parse_users),
    "gap": ("gap_s", parse_duration_s),
    "v_max": ("v_max", float),
    "strict_parse": ("strict_parse", _parse_bool),
    "dist": ("stay_dist", float),
    "time": ("stay_time_s", parse_duration_s),
    "anchored": ("anchored", _parse_bool),
    "lp_eps": ("lp_eps", float),
    "lp_min_pts": ("lp_min_pts", int),
    "poi_eps": ("poi_eps", float),
    "poi_min_pts": ("poi_min_pts", int),
    "min_users": ("min_users", int),
    "jobs": ("jobs", int),
    "top": ("top", int),
}


def load_config_file(path: Path) -> dict[str, object]:
    """Plain key = value lines; '#' starts a comment, keys match the flags."""
    values: dict[str, object] = {}
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise UsageError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key = key.strip().lower().replace("-", "_")
        if key not in _CONFIG_KEYS:
            raise UsageError(f"{path}:{lineno}: unknown config key {key!r}")
        dest, convert = _CONFIG_KEYS[key]
        values[dest] = convert(value.strip())
    return values


def _add_ingest_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--data", dest="data_dir", metavar="DIR", help="data directory in Geolife layout")
    p.add_argument("--users", type=_parse_users, help="comma-separated user ids (default: all)")
    p.add_argument("--gap", dest="gap_s", type=parse_duration_s, default=None, metavar="DURATION",
                   help="recording gap that starts a new trajectory (default 30m)")
    p.add_argument("--v-max", dest="v_max", type=float, default=None, metavar="MPS",
                   help="speed spike cutoff in m/s (default 50)")
    p.add_argument("--strict-parse", action="store_true", default=None,
                   help="fail on the first malformed record instead of skipping")


def _add_staypoint_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--dist", dest="stay_dist", type=float, default=None, metavar="METERS",
                   help="dwell radius in meters (default 200)")
    p.add_argument("--time", dest="stay_time_s", type=parse_duration_s, default=None, metavar="DURATION",
                   help="dwell duration threshold (default 20m)")
    p.add_argument("--anchored", action="store_true", default=None,
                   help="measure dwell distance from the run's first fix")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="poimine",
        description="Mine stay points, frequent places, community POIs and "
                    "user similarity from raw GPS logs.",
    )
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--config", type=Path, default=None,
                        help="key = value config file; flags override it")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", parents=[shared],
                       help="parse, segment and clean raw logs into fixes.csv")
    _add_ingest_flags(p)
    p.add_argument("--out", dest="out_dir", metavar="DIR", help="output directory")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("staypoints", parents=[shared], help="detect stay points from fixes.csv")
    p.add_argument("--fixes", type=Path, help="fixes.csv from the ingest stage")
    _add_staypoint_flags(p)
    p.add_argument("--out", dest="out_dir", metavar="DIR", help="output directory")
    p.set_defaults(func=cmd_staypoints)

    p = sub.add_parser("locations", parents=[shared], help="cluster one user's stay points into location points")
    p.add_argument("--staypoints", type=Path, help="staypoints.csv from the previous stage")
    p.add_argument("--eps", dest="lp_eps", type=float, default=None, metavar="METERS",
                   help="cluster radius in meters (default 100)")
    p.add_argument("--min-pts", dest="lp_min_pts", type=int, default=None, metavar="N",
                   help="visits needed to form a place (default 4)")
    p.add_argument("--out", dest="out_dir", metavar="DIR", help="output directory")
    p.set_defaults(func=cmd_locations)

    p = sub.add_parser("pois", parents=[shared], help="cluster all users' location points into POIs")
    p.add_argument("--locations", type=Path, help="location_points.csv from the previous stage")
    p.add_argument("--eps", dest="poi_eps", type=float, default=None, metavar="METERS",
                   help="cluster radius in meters (default 200)")
    p.add_argument("--min-pts", dest="poi_min_pts", type=int, default=None, metavar="N",
                   help="location points needed to form a POI (default 4)")
    p.add_argument("--min-users", dest="min_users", type=int, default=None, metavar="N",
                   help="distinct users a POI must cover (default 1)")
    p.add_argument("--out", dest="out_dir", metavar="DIR", help="output directory")
    p.set_defaults(func=cmd_pois)

    p = sub.add_parser("similarity", parents=[shared], help="rank user pairs by shared POIs")
    p.add_argument("--pois", dest="pois_csv", type=Path, help="pois.csv from the previous stage")
    p.add_argument("--locations", type=Path, default=None,
                   help="location_points.csv, to include users with zero POIs")
    p.add_argument("--top", type=int, default=None, help="pairs to print (default 10)")
    p.add_argument("--out", dest="out_dir", metavar="DIR", help="output directory")
    p.set_defaults(func=cmd_similarity)

    p = sub.add_parser("kdist", parents=[shared], help="k-th nearest neighbor curve for eps estimation")
    p.add_argument("--input", type=Path, help="any stage CSV with lat/lon columns")
    p.add_argument("--k", type=int, default=4)
    p.add_argument("--out", type=Path, default=None, help="curve CSV (default: stdout)")
    p.set_defaults(func=cmd_kdist)

    p = sub.add_parser("pipeline", parents=[shared], help="run every stage in memory")
    _add_ingest_flags(p)
    _add_staypoint_flags(p)
    p.add_argument("--lp-eps", dest="lp_eps", type=float, default=None, metavar="METERS",
                   help="location-point cluster radius (default 100)")
    p.add_argument("--lp-min-pts", dest="lp_min_pts", type=int, default=None, metavar="N",
                   help="visits needed to form a place (default 4)")
    p.add_argument("--poi-eps", dest="poi_eps", type=float, default=None, metavar="METERS",
                   help="POI cluster radius (default 200)")
    p.add_argument("--poi-min-pts", dest="poi_min_pts", type=int, default=None, metavar="N",
                   help="location points needed to form a POI (default 4)")
    p.add_argument("--min-users", dest="min_users", type=int, default=None, metavar="N",
                   help="distinct users a POI must cover (default 1)")
    p.add_argument("--jobs", type=int, default=None, help="user-level worker processes")
    p.add_argument("--top", type=int, default=None, help="similar pairs in the summary")
    p.add_argument("--out", dest="out_dir", metavar="DIR", help="output directory")
    p.set_defaults(func=cmd_pipeline)

    return parser


def _effective(args: argparse.Namespace, dest: str, default):
    """Flag if given, else config-file value, else the built-in default."""
    value = getattr(args, dest, None)
    if value is not None:
        return value
    return args._config_values.get(dest, default)


def _require_out_dir(args: argparse.Namespace) -> Path:
    out = _effective(args, "out_dir", None)
    if out is None:
        raise UsageError("--out is required")
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _require_data_dir(args: argparse.Namespace) -> Path:
    data = _effective(args, "data_dir", None)
    if data is None:
        raise UsageError("--data is required")
    path = Path(data)
    if not path.is_dir():
        raise UsageError(f"data directory {path} does not exist")
    return path


def _ingest_users(args: argparse.Namespace):
    """Shared by ingest and pipeline: yields cleaned per-user trajectories."""
    data_dir = _require_data_dir(args)
    wanted = _effective(args, "users", None)
    dirs = discover_users(data_dir)
    if wanted is not None:
        found = {d.name for d in dirs}
        missing = sorted(set(wanted) - found)
        if missing:
            raise DataError(f"requested users not in data directory: {', '.join(missing)}")
        dirs = [d for d in dirs if d.name in set(wanted)]
    if not dirs:
        raise DataError(f"no users found under {data_dir}")
    gap_s = _effective(args, "gap_s", DEFAULT_GAP_THRESHOLD_S)
    v_max = _effective(args, "v_max", DEFAULT_MAX_SPEED_MPS)
    strict = bool(_effective(args, "strict_parse", False))
    for user_dir in dirs:
        log = load_user(user_dir, strict=strict)
        trajectories = segment_trajectories(log, gap_s)
        cleaned, report = clean_trajectories(trajectories, v_max)
        yield log, cleaned, report


def cmd_ingest(args: argparse.Namespace) -> int:
    out_dir = _require_out_dir(args)
    per_user = {}
    cleaning_rows = []
    for log, cleaned, report in _ingest_users(args):
        per_user[log.user_id] = cleaned
        cleaning_rows.append((log.user_id, log.invalid_lines, report))
    reports.write_fixes_csv(per_user, out_dir / "fixes.csv")
    _write_cleaning_rows(cleaning_rows, out_dir / "cleaning_report.csv")
    total = sum(len(t) for trajs in per_user.values() for t in trajs)
    print(f"wrote {out_dir / 'fixes.csv'}: {total} fixes from {len(per_user)} users")
    return EXIT_OK


def _write_cleaning_rows(rows, path: Path) -> None:
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
        for user_id, invalid_lines, report in sorted(rows):
            out.writerow(
                [
                    user_id,
                    invalid_lines,
                    report.fixes_in,
                    report.fixes_removed_speed,
                    report.fixes_removed_range,
                    report.trajectories_dropped_empty,
                ]
            )


def cmd_staypoints(args: argparse.Namespace) -> int:
    if args.fixes is None:
        raise UsageError("--fixes is required")
    out_dir = _require_out_dir(args)
    per_user = reports.read_fixes_csv(args.fixes)
    params = StayPointParams(
        dist_threshold_m=_effective(args, "stay_dist", DEFAULT_DIST_THRESHOLD_M),
        time_threshold_s=_effective(args, "stay_time_s", DEFAULT_TIME_THRESHOLD_S),
        anchored=bool(_effective(args, "anchored", False)),
    )
    stay_points = []
    for user_id in sorted(per_user):
        for traj in per_user[user_id]:
            stay_points.extend(detect_stay_points(traj, params))
    reports.write_staypoints_csv(stay_points, out_dir / "staypoints.csv")
    reports.emit_geojson(reports.staypoint_features(stay_points), out_dir / "staypoints.geojson")
    mode = "anchored" if params.anchored else "consecutive"
    print(f"wrote {len(stay_points)} stay points ({mode} mode)")
    return EXIT_OK


def cmd_locations(args: argparse.Namespace) -> int:
    if args.staypoints is None:
        raise UsageError("--staypoints is required")
    out_dir = _require_out_dir(args)
    per_user = reports.read_staypoints_csv(args.staypoints)
    eps = _effective(args, "lp_eps", DEFAULT_LP_EPS_M)
    min_pts = _effective(args, "lp_min_pts", DEFAULT_LP_MIN_PTS)
    location_points = []
    for user_id in sorted(per_user):
        location_points.extend(extract_location_points(per_user[user_id], eps, min_pts))
    reports.write_location_points_csv(location_points, out_dir / "location_points.csv")
    print(f"wrote {len(location_points)} location points for {len(per_user)} users")
    return EXIT_OK


def cmd_pois(args: argparse.Namespace) -> int:
    if args.locations is None:
        raise UsageError("--locations is required")
    out_dir = _require_out_dir(args)
    location_points = reports.read_location_points_csv(args.locations)
    pois = extract_pois(
        location_points,
        _effective(args, "poi_eps", DEFAULT_POI_EPS_M),
        _effective(args, "poi_min_pts", DEFAULT_POI_MIN_PTS),
        _effective(args, "min_users", 1),
    )
    reports.write_pois_csv(pois, out_dir / "pois.csv")
    reports.emit_geojson(reports.poi_features(pois), out_dir / "pois.geojson")
    print(f"wrote {len(pois)} POIs")
    return EXIT_OK


def cmd_similarity(args: argparse.Namespace) -> int:
    if args.pois_csv is None:
        raise UsageError("--pois is required")
    out_dir = _require_out_dir(args)
    sets = reports.read_poi_user_sets(args.pois_csv)
    if args.locations is not None:
        for lp in reports.read_location_points_csv(args.locations):
            sets.setdefault(lp.user_id, set())
    if len(sets) < 2:
        raise DataError("similarity needs at least 2 users with location data")
    ranking = rank_pairs(sets)
    reports.write_similarity_csv(ranking, out_dir / "similarity.csv")
    top = _effective(args, "top", 10)
    for r in ranking[:top]:
        print(f"{r.user_a} ~ {r.user_b}: {r.shared}/{r.union} = {format_score_2dp(r)}")
    return EXIT_OK


def cmd_kdist(args: argparse.Namespace) -> int:
    if args.input is None:
        raise UsageError("--input is required")
    points = reports.read_points_csv(args.input)
    if len(points) <= args.k:
        raise DataError(f"need more than k={args.k} points, got {len(points)}")
    curve = k_dist_curve(points, args.k)
    if args.out is not None:
        reports.write_kdist_csv(curve, args.out)
    else:
        print("rank,distance_m")
        for rank, dist in enumerate(curve):
            print(f"{rank},{dist}")
    suggestion = suggest_eps(curve)
    note = "" if suggestion.pronounced else " (no pronounced knee; treat with suspicion)"
    print(f"suggested eps: {suggestion.eps_m:.1f} m at rank {suggestion.knee_index}{note}",
          file=sys.stderr)
    return EXIT_OK


def cmd_pipeline(args: argparse.Namespace) -> int:
    data_dir = _require_data_dir(args)
    out_dir = _effective(args, "out_dir", None)
    if out_dir is None:
        raise UsageError("--out is required")
    config = PipelineConfig(
        data_dir=data_dir,
        output_dir=Path(out_dir),
        users=_effective(args, "users", None),
        gap_threshold_s=_effective(args, "gap_s", DEFAULT_GAP_THRESHOLD_S),
        v_max_mps=_effective(args, "v_max", DEFAULT_MAX_SPEED_MPS),
        stay_dist_m=_effective(args, "stay_dist", DEFAULT_DIST_THRESHOLD_M),
        stay_time_s=_effective(args, "stay_time_s", DEFAULT_TIME_THRESHOLD_S),
        anchored=bool(_effective(args, "anchored", False)),
        lp_eps_m=_effective(args, "lp_eps", DEFAULT_LP_EPS_M),
        lp_min_pts=_effective(args, "lp_min_pts", DEFAULT_LP_MIN_PTS),
        poi_eps_m=_effective(args, "poi_eps", DEFAULT_POI_EPS_M),
        poi_min_pts=_effective(args, "poi_min_pts", DEFAULT_POI_MIN_PTS),
        min_users=_effective(args, "min_users", 1),
        strict_parse=bool(_effective(args, "strict_parse", False)),
        jobs=_effective(args, "jobs", 1),
        top_pairs=_effective(args, "top", 10),
    )
    summary = run_pipeline(config)
    print(format_summary(summary))
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args._config_values = load_config_file(args.config) if args.config else {}
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, PltFormatError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
