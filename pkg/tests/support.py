"""Shared test helpers: geometry builders, PLT writers, and the independent
brute-force clustering oracle the fast implementation is checked against."""

from __future__ import annotations

import math
from datetime import datetime, timedelta, timezone
from pathlib import Path

from poimine.clustering import NOISE
from poimine.geo import EARTH_RADIUS_M, GeoPoint, GpsFix, Trajectory, haversine_distance

UTC = timezone.utc
T0 = datetime(2009, 5, 1, 0, 0, 0, tzinfo=UTC)

METERS_PER_DEG_LAT = EARTH_RADIUS_M * math.pi / 180.0


def offset_point(origin: GeoPoint, north_m: float, east_m: float) -> GeoPoint:
    """Point displaced by metric offsets, small-angle equirectangular inverse."""
    dlat = north_m / METERS_PER_DEG_LAT
    dlon = east_m / (METERS_PER_DEG_LAT * math.cos(math.radians(origin.lat)))
    return GeoPoint(origin.lat + dlat, origin.lon + dlon)


def fix_at(point: GeoPoint, seconds: float, altitude_m: float | None = None) -> GpsFix:
    return GpsFix(point=point, timestamp=T0 + timedelta(seconds=seconds), altitude_m=altitude_m)


def walk_trajectory(user_id: str, steps: list[tuple[GeoPoint, float]]) -> Trajectory:
    """Trajectory from (point, seconds-after-T0) pairs."""
    return Trajectory(user_id, tuple(fix_at(p, s) for p, s in steps))


def dwell_fixes(
    center: GeoPoint,
    start: datetime,
    n_fixes: int,
    step_s: float,
    radius_m: float,
    turns: int = 1,
) -> list[GpsFix]:
    """Fixes circling a center at the given radius.

    Using whole turns over evenly spaced angles makes the coordinate mean
    equal the center up to float dust, so planted dwell centroids are exact.
    """
    fixes = []
    for i in range(n_fixes):
        angle = 2.0 * math.pi * turns * i / n_fixes
        p = offset_point(center, radius_m * math.sin(angle), radius_m * math.cos(angle))
        fixes.append(GpsFix(point=p, timestamp=start + timedelta(seconds=i * step_s)))
    return fixes


# ------------------------------------------------------------------ PLT

PLT_HEADER = (
    "Geolife trajectory\n"
    "WGS 84\n"
    "Altitude is in Feet\n"
    "Reserved 3\n"
    "0,2,255,My Track,0,0,2,8421376\n"
    "0\n"
)

_PLT_EPOCH = datetime(1899, 12, 30, tzinfo=UTC)


def plt_record(lat: float, lon: float, alt_feet: float, ts: datetime) -> str:
    days = (ts - _PLT_EPOCH).total_seconds() / 86400.0
    return f"{lat:.6f},{lon:.6f},0,{alt_feet:g},{days:.10f},{ts:%Y-%m-%d},{ts:%H:%M:%S}"


def plt_text(records: list[str]) -> str:
    return PLT_HEADER + "".join(line + "\n" for line in records)


def fixes_to_plt(fixes: list[GpsFix], alt_feet: float = 492.0) -> str:
    return plt_text([plt_record(f.point.lat, f.point.lon, alt_feet, f.timestamp) for f in fixes])


def write_plt(path: Path, content: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(content, encoding="utf-8")


# ------------------------------------------- independent clustering oracle

def brute_force_dbscan(points: list[GeoPoint], eps_m: float, min_pts: int):
    """Reference clustering straight from the definitions, O(n^2).

    Cores have at least min_pts points (self included) within eps; clusters
    are connected components of the core adjacency graph, numbered by their
    smallest core index; a border point joins the earliest-created adjacent
    cluster; everything else is noise.
    """
    n = len(points)
    within = [
        [haversine_distance(points[i], points[j]) <= eps_m for j in range(n)]
        for i in range(n)
    ]
    core = [sum(row) >= min_pts for row in within]
    labels = [NOISE] * n
    cluster_id = 0
    for i in range(n):
        if not core[i] or labels[i] != NOISE:
            continue
        stack = [i]
        labels[i] = cluster_id
        while stack:
            c = stack.pop()
            for j in range(n):
                if core[j] and labels[j] == NOISE and within[c][j]:
                    labels[j] = cluster_id
                    stack.append(j)
        cluster_id += 1
    for i in range(n):
        if core[i]:
            continue
        adjacent = [labels[j] for j in range(n) if core[j] and within[i][j]]
        if adjacent:
            labels[i] = min(adjacent)
    return labels, core


def partition_of(labels: list[int]) -> set[frozenset[int]]:
    groups: dict[int, set[int]] = {}
    for idx, label in enumerate(labels):
        if label != NOISE:
            groups.setdefault(label, set()).add(idx)
    return {frozenset(members) for members in groups.values()}


def assert_same_clustering(got_labels, got_core, want_labels, want_core):
    assert got_core == want_core, "core point sets differ"
    got_noise = {i for i, l in enumerate(got_labels) if l == NOISE}
    want_noise = {i for i, l in enumerate(want_labels) if l == NOISE}
    assert got_noise == want_noise, "noise sets differ"
    assert partition_of(got_labels) == partition_of(want_labels), "partitions differ"


def random_cloud(rng, n: int, center: GeoPoint, extent_m: float) -> list[GeoPoint]:
    """n points uniform over a square of side extent_m around center."""
    half = extent_m / 2.0
    return [
        offset_point(center, rng.uniform(-half, half), rng.uniform(-half, half))
        for _ in range(n)
    ]
