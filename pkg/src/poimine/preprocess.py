"""Trajectory cleaning: drop corrupt fixes and physically implausible spikes.

Cleaning is point removal, never value smoothing, so every output fix is one
of the input fixes. It runs after gap segmentation, which keeps spike checks
from ever spanning a recording gap.
"""

from __future__ import annotations

from dataclasses import dataclass

from .geo import GpsFix, Trajectory, speed_between

DEFAULT_MAX_SPEED_MPS = 50.0


@dataclass
class CleaningReport:
    """Counts of what cleaning did. All counters are non-negative."""

    fixes_in: int = 0
    fixes_removed_speed: int = 0
    fixes_removed_range: int = 0
    trajectories_dropped_empty: int = 0

    def merge(self, other: "CleaningReport") -> None:
        self.fixes_in += other.fixes_in
        self.fixes_removed_speed += other.fixes_removed_speed
        self.fixes_removed_range += other.fixes_removed_range
        self.trajectories_dropped_empty += other.trajectories_dropped_empty


def _coords_usable(fix: GpsFix) -> bool:
    p = fix.point
    # GeoPoint construction already rejects out-of-range values; the range
    # check stays here so the rule holds for any conceivable input
    if not (-90.0 <= p.lat <= 90.0 and -180.0 <= p.lon <= 180.0):
        return False
    if p.lat == 0.0 and p.lon == 0.0:  # null-island placeholder
        return False
    return True


def drop_invalid(t: Trajectory) -> tuple[Trajectory | None, CleaningReport]:
    """Remove fixes with unusable coordinates or non-increasing timestamps.

    When timestamps tie or go backwards, the earliest fix wins. Returns None
    (with the drop recorded in the report) when nothing survives.
    """
    report = CleaningReport(fixes_in=len(t.fixes))
    kept: list[GpsFix] = []
    for fix in t.fixes:
        if not _coords_usable(fix):
            report.fixes_removed_range += 1
            continue
        if kept and fix.timestamp <= kept[-1].timestamp:
            report.fixes_removed_range += 1
            continue
        kept.append(fix)
    if not kept:
        report.trajectories_dropped_empty = 1
        return None, report
    return Trajectory(t.user_id, tuple(kept)), report


def remove_spikes(
    t: Trajectory, v_max_mps: float = DEFAULT_MAX_SPEED_MPS
) -> tuple[Trajectory, CleaningReport]:
    """Drop fixes that imply travel faster than v_max_mps from the last kept fix.

    Single forward pass: the first fix anchors, and each candidate is tested
    against the most recently kept fix, so consecutive spikes all fall to the
    same anchor. Requires strictly increasing timestamps (run drop_invalid
    first on raw data).
    """
    report = CleaningReport(fixes_in=len(t.fixes))
    kept: list[GpsFix] = [t.fixes[0]]
    for fix in t.fixes[1:]:
        if speed_between(kept[-1], fix) > v_max_mps:
            report.fixes_removed_speed += 1
            continue
        kept.append(fix)
    return Trajectory(t.user_id, tuple(kept)), report


def clean_trajectory(
    t: Trajectory, v_max_mps: float = DEFAULT_MAX_SPEED_MPS
) -> tuple[Trajectory | None, CleaningReport]:
    """drop_invalid followed by remove_spikes; None when the trajectory empties."""
    cleaned, report = drop_invalid(t)
    if cleaned is None:
        return None, report
    cleaned, spike_report = remove_spikes(cleaned, v_max_mps)
    report.fixes_removed_speed += spike_report.fixes_removed_speed
    return cleaned, report


def clean_trajectories(
    trajectories: list[Trajectory], v_max_mps: float = DEFAULT_MAX_SPEED_MPS
) -> tuple[list[Trajectory], CleaningReport]:
    """Clean each trajectory, dropping the ones that end up empty."""
    total = CleaningReport()
    kept: list[Trajectory] = []
    for t in trajectories:
        cleaned, report = clean_trajectory(t, v_max_mps)
        total.merge(report)
        if cleaned is not None:
            kept.append(cleaned)
    return kept, total
