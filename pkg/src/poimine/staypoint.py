"""Stay-point detection: dwell regions where a user lingers inside a radius.

A forward scan partitions the trajectory into maximal candidate runs. In the
default mode a run keeps growing while each fix is within dist_threshold_m of
the PREVIOUS fix; in anchored mode the distance is measured from the run's
FIRST fix instead, which stops slow drifts from accumulating into one giant
run. Either way, a run becomes a stay point only when its time span strictly
exceeds time_threshold_s, and the scan resumes at the fix that broke the run.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime

from .geo import GeoPoint, Trajectory, centroid, haversine_distance

DEFAULT_DIST_THRESHOLD_M = 200.0
DEFAULT_TIME_THRESHOLD_S = 20.0 * 60.0


@dataclass(frozen=True)
class StayPointParams:
    """Dwell thresholds. Both must be strictly positive."""

    dist_threshold_m: float = DEFAULT_DIST_THRESHOLD_M
    time_threshold_s: float = DEFAULT_TIME_THRESHOLD_S
    anchored: bool = False

    def __post_init__(self) -> None:
        if self.dist_threshold_m <= 0.0:
            raise ValueError("dist_threshold_m must be positive")
        if self.time_threshold_s <= 0.0:
            raise ValueError("time_threshold_s must be positive")


@dataclass(frozen=True)
class StayPoint:
    """One dwell event, summarized by the mean position of its member fixes."""

    user_id: str
    centroid: GeoPoint
    arrival: datetime
    departure: datetime
    fix_count: int

    @property
    def duration_s(self) -> float:
        return (self.departure - self.arrival).total_seconds()


def detect_stay_points(t: Trajectory, params: StayPointParams | None = None) -> list[StayPoint]:
    """Extract time-ordered stay points from one cleaned trajectory.

    Runs are disjoint, contiguous index ranges; a run that reaches the end of
    the trajectory is still evaluated for emission. Trajectories with fewer
    than two fixes cannot dwell and yield an empty list.
    """
    if params is None:
        params = StayPointParams()
    fixes = t.fixes
    n = len(fixes)
    if n < 2:
        return []

    stay_points: list[StayPoint] = []
    start = 0
    while start < n:
        end = start  # inclusive index of the last fix in the run
        while end + 1 < n:
            reference = fixes[start] if params.anchored else fixes[end]
            if haversine_distance(reference.point, fixes[end + 1].point) < params.dist_threshold_m:
                end += 1
            else:
                break
        duration = (fixes[end].timestamp - fixes[start].timestamp).total_seconds()
        if end > start and duration > params.time_threshold_s:
            run = fixes[start : end + 1]
            stay_points.append(
                StayPoint(
                    user_id=t.user_id,
                    centroid=centroid([f.point for f in run]),
                    arrival=run[0].timestamp,
                    departure=run[-1].timestamp,
                    fix_count=len(run),
                )
            )
        start = end + 1
    return stay_points
