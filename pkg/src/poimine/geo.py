"""Geodesic primitives and core spatial types shared by every pipeline stage.

Distances are great-circle distances on a sphere of mean radius 6,371,000 m.
Centroids are plain arithmetic means in degree space, which is adequate at
city scale; antimeridian-crossing point sets are not supported.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import datetime
from typing import Iterable

EARTH_RADIUS_M = 6_371_000.0


@dataclass(frozen=True, slots=True)
class GeoPoint:
    """A latitude/longitude pair in decimal degrees (WGS-style, no datum math).

    Raises ValueError on non-finite or out-of-range coordinates, so any
    GeoPoint that exists is valid.
    """

    lat: float
    lon: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.lat) and math.isfinite(self.lon)):
            raise ValueError(f"coordinates must be finite, got ({self.lat}, {self.lon})")
        if not -90.0 <= self.lat <= 90.0:
            raise ValueError(f"latitude {self.lat} outside [-90, 90]")
        if not -180.0 <= self.lon <= 180.0:
            raise ValueError(f"longitude {self.lon} outside [-180, 180]")


@dataclass(frozen=True, slots=True)
class GpsFix:
    """One timestamped GPS sample.

    Attributes:
        point: position of the sample.
        timestamp: timezone-aware UTC instant, second resolution or better.
        altitude_m: altitude in meters, or None when the logger reported none.
    """

    point: GeoPoint
    timestamp: datetime
    altitude_m: float | None = None


@dataclass(frozen=True)
class Trajectory:
    """An ordered, non-empty sequence of fixes recorded by one user.

    Timestamps are expected to increase strictly; raw logs may contain ties,
    which the cleaning stage removes before any downstream use.
    """

    user_id: str
    fixes: tuple[GpsFix, ...]

    def __post_init__(self) -> None:
        if not self.fixes:
            raise ValueError("trajectory must contain at least one fix")

    def __len__(self) -> int:
        return len(self.fixes)

    @property
    def start(self) -> datetime:
        return self.fixes[0].timestamp

    @property
    def end(self) -> datetime:
        return self.fixes[-1].timestamp


def haversine_distance(a: GeoPoint, b: GeoPoint) -> float:
    """Great-circle distance between two points, in meters.

    Symmetric and non-negative; zero for identical points.
    """
    phi1 = math.radians(a.lat)
    phi2 = math.radians(b.lat)
    d_phi = math.radians(b.lat - a.lat)
    d_lam = math.radians(b.lon - a.lon)
    h = math.sin(d_phi / 2.0) ** 2 + math.cos(phi1) * math.cos(phi2) * math.sin(d_lam / 2.0) ** 2
    return 2.0 * EARTH_RADIUS_M * math.asin(min(1.0, math.sqrt(h)))


def centroid(points: Iterable[GeoPoint]) -> GeoPoint:
    """Component-wise arithmetic mean of latitudes and longitudes.

    Uses exact float summation, so the result does not depend on the order
    of the input. Raises ValueError on an empty input.
    """
    pts = list(points)
    if not pts:
        raise ValueError("centroid of an empty point list is undefined")
    n = len(pts)
    return GeoPoint(
        lat=math.fsum(p.lat for p in pts) / n,
        lon=math.fsum(p.lon for p in pts) / n,
    )


def speed_between(a: GpsFix, b: GpsFix) -> float:
    """Implied straight-line ground speed from fix a to fix b, in m/s.

    Raises ValueError unless b is strictly later than a.
    """
    elapsed = (b.timestamp - a.timestamp).total_seconds()
    if elapsed <= 0.0:
        raise ValueError(f"fixes must be strictly ordered in time (elapsed {elapsed}s)")
    return haversine_distance(a.point, b.point) / elapsed
