"""Density-based clustering over geographic points with a great-circle metric.

dbscan() implements the classic algorithm: a point is core when at least
min_pts points (itself included) lie within eps_m of it, clusters are maximal
density-connected sets, border points join the first cluster that reaches
them in scan order, and everything else is noise.

Neighbor queries go through a uniform bucket grid in locally projected
coordinates (equirectangular about the data's mean latitude), giving
near-linear behavior on city-scale data. The grid only pre-filters
candidates; membership is always confirmed with the exact haversine
distance, and the cell size carries enough margin for the projection's
east-west distortion across the data's latitude range.
"""

from __future__ import annotations

import heapq
import math
from collections import deque
from dataclasses import dataclass

from .geo import EARTH_RADIUS_M, GeoPoint, haversine_distance

NOISE = -1
_UNCLASSIFIED = -2


@dataclass(frozen=True)
class DbscanParams:
    eps_m: float
    min_pts: int

    def __post_init__(self) -> None:
        if self.eps_m <= 0.0:
            raise ValueError("eps_m must be positive")
        if self.min_pts < 1:
            raise ValueError("min_pts must be at least 1")


@dataclass
class ClusterAssignment:
    """Per-point labels (cluster id in 0..k-1, or NOISE) plus core flags."""

    labels: list[int]
    core: list[bool]

    @property
    def n_clusters(self) -> int:
        return max(self.labels, default=NOISE) + 1

    def clusters(self) -> list[list[int]]:
        """Member indices per cluster id, ascending within each cluster."""
        out: list[list[int]] = [[] for _ in range(self.n_clusters)]
        for idx, label in enumerate(self.labels):
            if label != NOISE:
                out[label].append(idx)
        return out


class _GridIndex:
    """Uniform bucket grid over equirectangular-projected points."""

    def __init__(self, points: list[GeoPoint], eps_m: float):
        self._points = points
        lat0 = math.fsum(p.lat for p in points) / len(points)
        self._cos0 = math.cos(math.radians(lat0))
        # worst-case east-west stretch between the projection latitude and
        # the most extreme latitude in the data, plus slack for small-angle
        # approximation error
        max_abs_lat = max(abs(p.lat) for p in points)
        cos_extreme = max(math.cos(math.radians(min(max_abs_lat, 89.999))), 1e-9)
        self._cell_m = eps_m * max(1.0, self._cos0 / cos_extreme) * 1.02
        self._cells: dict[tuple[int, int], list[int]] = {}
        self._keys: list[tuple[int, int]] = []
        for i, p in enumerate(points):
            key = self._cell_of(p)
            self._keys.append(key)
            self._cells.setdefault(key, []).append(i)

    def _cell_of(self, p: GeoPoint) -> tuple[int, int]:
        x = EARTH_RADIUS_M * math.radians(p.lon) * self._cos0
        y = EARTH_RADIUS_M * math.radians(p.lat)
        return (math.floor(x / self._cell_m), math.floor(y / self._cell_m))

    def neighbors_within(self, i: int, radius_m: float) -> list[int]:
        """Indices (ascending, including i) within radius_m of point i."""
        p = self._points[i]
        cx, cy = self._keys[i]
        found: list[int] = []
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                bucket = self._cells.get((cx + dx, cy + dy))
                if not bucket:
                    continue
                for j in bucket:
                    if haversine_distance(p, self._points[j]) <= radius_m:
                        found.append(j)
        found.sort()
        return found


def dbscan(points: list[GeoPoint], params: DbscanParams) -> ClusterAssignment:
    """Cluster points; deterministic for a given input order.

    Cluster ids are dense and follow discovery order. Border points that are
    reachable from more than one cluster go to the one discovered first.
    """
    n = len(points)
    if n == 0:
        return ClusterAssignment(labels=[], core=[])
    grid = _GridIndex(points, params.eps_m)
    labels = [_UNCLASSIFIED] * n
    core = [False] * n
    cluster_id = 0
    for i in range(n):
        if labels[i] != _UNCLASSIFIED:
            continue
        neighborhood = grid.neighbors_within(i, params.eps_m)
        if len(neighborhood) < params.min_pts:
            labels[i] = NOISE
            continue
        core[i] = True
        labels[i] = cluster_id
        queue = deque(neighborhood)
        while queue:
            j = queue.popleft()
            if labels[j] == NOISE:
                labels[j] = cluster_id  # border point, by definition not core
                continue
            if labels[j] != _UNCLASSIFIED:
                continue
            labels[j] = cluster_id
            j_neighborhood = grid.neighbors_within(j, params.eps_m)
            if len(j_neighborhood) >= params.min_pts:
                core[j] = True
                queue.extend(j_neighborhood)
        cluster_id += 1
    return ClusterAssignment(labels=labels, core=core)


def k_dist_curve(points: list[GeoPoint], k: int) -> list[float]:
    """Distance from each point to its k-th nearest neighbor (self excluded),
    sorted descending for knee inspection.

    Requires more points than k. Exact all-pairs computation; each pair is
    measured once and fed to both endpoints' running k-smallest heaps.
    """
    n = len(points)
    if k < 1:
        raise ValueError("k must be at least 1")
    if n <= k:
        raise ValueError(f"need more than k={k} points, got {n}")
    # max-heaps (negated) holding each point's k smallest neighbor distances
    heaps: list[list[float]] = [[] for _ in range(n)]
    for i in range(n):
        p = points[i]
        for j in range(i + 1, n):
            d = haversine_distance(p, points[j])
            for h in (heaps[i], heaps[j]):
                if len(h) < k:
                    heapq.heappush(h, -d)
                elif d < -h[0]:
                    heapq.heapreplace(h, -d)
    curve = [-h[0] for h in heaps]
    curve.sort(reverse=True)
    return curve


@dataclass(frozen=True)
class EpsSuggestion:
    """Knee-based eps estimate. Advisory only; pipeline defaults stay fixed."""

    eps_m: float
    knee_index: int
    pronounced: bool


def suggest_eps(curve: list[float]) -> EpsSuggestion:
    """Pick the curve value at the point of maximum discrete curvature.

    The knee is the index with the largest second difference. When that
    maximum is below 1% of the curve's total drop, the knee is not
    pronounced and the suggestion should be treated with suspicion.
    """
    if len(curve) < 3:
        raise ValueError("k-dist curve must have at least 3 values")
    best_index = 1
    best_d2 = -math.inf
    for i in range(1, len(curve) - 1):
        d2 = curve[i - 1] - 2.0 * curve[i] + curve[i + 1]
        if d2 > best_d2:
            best_d2 = d2
            best_index = i
    value_range = curve[0] - curve[-1]
    pronounced = value_range > 0.0 and best_d2 >= 0.01 * value_range
    return EpsSuggestion(eps_m=curve[best_index], knee_index=best_index, pronounced=pronounced)
