"""Geolife PLT ingestion: parse per-file logs, merge per user, split at gaps.

Expected on-disk layout is the stock Geolife one::

    Data/
      000/
        Trajectory/
          20081023025304.plt
          ...
      001/
        ...

Each .plt file carries 6 header lines followed by one record per line:

    lat,lon,0,altitude_feet,days_since_1899-12-30,YYYY-MM-DD,HH:MM:SS

Altitude is converted from feet to meters; the sentinel -777 means "not
available". The fractional-day field is redundant with the date and time
strings and is ignored. Timestamps are taken as UTC.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from .geo import GeoPoint, GpsFix, Trajectory

PLT_HEADER_LINES = 6
FEET_TO_METERS = 0.3048
MISSING_ALTITUDE_SENTINEL = -777.0

DEFAULT_GAP_THRESHOLD_S = 30.0 * 60.0


class PltFormatError(ValueError):
    """A .plt file does not follow the documented layout."""


@dataclass
class RawUserLog:
    """All of one user's fixes, merged across files, time-sorted, de-duplicated.

    invalid_lines counts records skipped during lenient parsing.
    """

    user_id: str
    fixes: list[GpsFix] = field(default_factory=list)
    invalid_lines: int = 0


def _parse_record(line: str) -> GpsFix | None:
    parts = line.split(",")
    if len(parts) != 7:
        return None
    try:
        lat = float(parts[0])
        lon = float(parts[1])
        alt_feet = float(parts[3])
        # fromisoformat accepts "YYYY-MM-DD HH:MM:SS" and is much faster
        # than strptime on million-line inputs
        ts = datetime.fromisoformat(parts[5] + " " + parts[6]).replace(tzinfo=timezone.utc)
        point = GeoPoint(lat, lon)
    except ValueError:
        return None
    altitude = None if alt_feet == MISSING_ALTITUDE_SENTINEL else alt_feet * FEET_TO_METERS
    return GpsFix(point=point, timestamp=ts, altitude_m=altitude)


def parse_plt(text: str, strict: bool = False) -> tuple[list[GpsFix], int]:
    """Parse the contents of one .plt file.

    Returns (fixes, skipped) where skipped counts malformed or out-of-range
    records. In strict mode the first bad record raises PltFormatError
    instead of being skipped. Fewer than 6 header lines is always an error.
    """
    lines = text.splitlines()
    if len(lines) < PLT_HEADER_LINES:
        raise PltFormatError(
            f"expected {PLT_HEADER_LINES} header lines, file has only {len(lines)} lines"
        )
    fixes: list[GpsFix] = []
    skipped = 0
    for lineno, line in enumerate(lines[PLT_HEADER_LINES:], start=PLT_HEADER_LINES + 1):
        if not line.strip():
            continue
        fix = _parse_record(line)
        if fix is None:
            if strict:
                raise PltFormatError(f"malformed record at line {lineno}: {line!r}")
            skipped += 1
            continue
        fixes.append(fix)
    return fixes, skipped


def load_user(user_dir: str | os.PathLike, strict: bool = False) -> RawUserLog:
    """Load every .plt file under ``<user_dir>/Trajectory`` into one sorted log.

    Fixes are merged across files, sorted by timestamp, and exact duplicates
    (same timestamp and coordinates) are dropped. The user id is the
    directory basename. Raises FileNotFoundError when the layout is absent.
    """
    user_path = Path(user_dir)
    traj_dir = user_path / "Trajectory"
    if not traj_dir.is_dir():
        raise FileNotFoundError(f"no Trajectory directory under {user_path}")
    log = RawUserLog(user_id=user_path.name)
    for plt_path in sorted(traj_dir.glob("*.plt")):
        fixes, skipped = parse_plt(plt_path.read_text(encoding="utf-8", errors="replace"), strict=strict)
        log.fixes.extend(fixes)
        log.invalid_lines += skipped
    log.fixes.sort(key=lambda f: f.timestamp)
    log.fixes = _dedupe_sorted(log.fixes)
    return log


def _dedupe_sorted(fixes: list[GpsFix]) -> list[GpsFix]:
    out: list[GpsFix] = []
    seen: set[tuple[datetime, float, float]] = set()
    for fix in fixes:
        key = (fix.timestamp, fix.point.lat, fix.point.lon)
        if key in seen:
            continue
        seen.add(key)
        out.append(fix)
    return out


def discover_users(data_dir: str | os.PathLike) -> list[Path]:
    """Return sorted user directories (those containing a Trajectory subdir)."""
    root = Path(data_dir)
    if not root.is_dir():
        raise FileNotFoundError(f"data directory {root} does not exist")
    return sorted(p for p in root.iterdir() if (p / "Trajectory").is_dir())


def segment_trajectories(
    log: RawUserLog, gap_threshold_s: float = DEFAULT_GAP_THRESHOLD_S
) -> list[Trajectory]:
    """Split a sorted user log into trajectories at recording gaps.

    A new trajectory starts whenever the time between consecutive fixes
    exceeds gap_threshold_s. Every fix lands in exactly one trajectory and
    the original order is preserved.
    """
    if not log.fixes:
        return []
    trajectories: list[Trajectory] = []
    run: list[GpsFix] = [log.fixes[0]]
    for fix in log.fixes[1:]:
        gap = (fix.timestamp - run[-1].timestamp).total_seconds()
        if gap > gap_threshold_s:
            trajectories.append(Trajectory(log.user_id, tuple(run)))
            run = [fix]
        else:
            run.append(fix)
    trajectories.append(Trajectory(log.user_id, tuple(run)))
    return trajectories
