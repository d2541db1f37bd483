"""CSV and GeoJSON emission, plus readers for chaining stage outputs.

Every writer is deterministic: identical inputs produce byte-identical
files. Floats are written in shortest round-trip form so staged runs lose
no precision between subcommands.
"""

from __future__ import annotations

import csv
import json
from datetime import datetime
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .geo import GeoPoint, GpsFix, Trajectory
from .places import LocationPoint, Poi
from .similarity import SimilarityRecord
from .staypoint import StayPoint


def point_feature(point: GeoPoint, properties: dict) -> dict:
    """A GeoJSON Point feature; coordinates are [lon, lat] per the format."""
    return {
        "type": "Feature",
        "geometry": {"type": "Point", "coordinates": [point.lon, point.lat]},
        "properties": properties,
    }


def emit_geojson(features: Iterable[dict], path: Path) -> None:
    collection = {"type": "FeatureCollection", "features": list(features)}
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(collection, fh, indent=2)
        fh.write("\n")


def _writer(path: Path):
    return open(path, "w", encoding="utf-8", newline="")


# ---------------------------------------------------------------- fixes

def write_fixes_csv(per_user: Mapping[str, Sequence[Trajectory]], path: Path) -> None:
    with _writer(path) as fh:
        out = csv.writer(fh)
        out.writerow(["user_id", "trajectory", "lat", "lon", "alt_m", "timestamp"])
        for user_id in sorted(per_user):
            for t_idx, traj in enumerate(per_user[user_id]):
                for fix in traj.fixes:
                    out.writerow(
                        [
                            user_id,
                            t_idx,
                            fix.point.lat,
                            fix.point.lon,
                            "" if fix.altitude_m is None else fix.altitude_m,
                            fix.timestamp.isoformat(),
                        ]
                    )


def read_fixes_csv(path: Path) -> dict[str, list[Trajectory]]:
    grouped: dict[tuple[str, int], list[GpsFix]] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            fix = GpsFix(
                point=GeoPoint(float(row["lat"]), float(row["lon"])),
                timestamp=datetime.fromisoformat(row["timestamp"]),
                altitude_m=float(row["alt_m"]) if row["alt_m"] else None,
            )
            grouped.setdefault((row["user_id"], int(row["trajectory"])), []).append(fix)
    per_user: dict[str, list[Trajectory]] = {}
    for (user_id, _), fixes in sorted(grouped.items()):
        per_user.setdefault(user_id, []).append(Trajectory(user_id, tuple(fixes)))
    return per_user


# ----------------------------------------------------------- stay points

def write_staypoints_csv(stay_points: Sequence[StayPoint], path: Path) -> None:
    with _writer(path) as fh:
        out = csv.writer(fh)
        out.writerow(["user_id", "lat", "lon", "arrival", "departure", "fix_count"])
        for sp in stay_points:
            out.writerow(
                [
                    sp.user_id,
                    sp.centroid.lat,
                    sp.centroid.lon,
                    sp.arrival.isoformat(),
                    sp.departure.isoformat(),
                    sp.fix_count,
                ]
            )


def read_staypoints_csv(path: Path) -> dict[str, list[StayPoint]]:
    per_user: dict[str, list[StayPoint]] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            sp = StayPoint(
                user_id=row["user_id"],
                centroid=GeoPoint(float(row["lat"]), float(row["lon"])),
                arrival=datetime.fromisoformat(row["arrival"]),
                departure=datetime.fromisoformat(row["departure"]),
                fix_count=int(row["fix_count"]),
            )
            per_user.setdefault(sp.user_id, []).append(sp)
    return per_user


def staypoint_features(stay_points: Sequence[StayPoint]) -> list[dict]:
    return [
        point_feature(
            sp.centroid,
            {
                "layer": "staypoint",
                "user_id": sp.user_id,
                "arrival": sp.arrival.isoformat(),
                "departure": sp.departure.isoformat(),
                "fix_count": sp.fix_count,
            },
        )
        for sp in stay_points
    ]


# ------------------------------------------------------- location points

def write_location_points_csv(location_points: Sequence[LocationPoint], path: Path) -> None:
    with _writer(path) as fh:
        out = csv.writer(fh)
        out.writerow(["user_id", "lat", "lon", "visits"])
        for lp in location_points:
            out.writerow([lp.user_id, lp.centroid.lat, lp.centroid.lon, lp.visit_count])


def read_location_points_csv(path: Path) -> list[LocationPoint]:
    points: list[LocationPoint] = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            points.append(
                LocationPoint(
                    user_id=row["user_id"],
                    centroid=GeoPoint(float(row["lat"]), float(row["lon"])),
                    stay_point_ids=(),
                    visit_count=int(row["visits"]),
                )
            )
    return points


# ------------------------------------------------------------------ POIs

def write_pois_csv(pois: Sequence[Poi], path: Path) -> None:
    with _writer(path) as fh:
        out = csv.writer(fh)
        out.writerow(["poi_id", "lat", "lon", "n_members", "n_users", "users"])
        for poi in pois:
            out.writerow(
                [
                    poi.poi_id,
                    poi.centroid.lat,
                    poi.centroid.lon,
                    len(poi.member_location_points),
                    len(poi.visiting_users),
                    ";".join(sorted(poi.visiting_users)),
                ]
            )


def read_poi_user_sets(path: Path) -> dict[str, set[int]]:
    """User -> poi-id sets straight from a pois.csv file."""
    sets: dict[str, set[int]] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            poi_id = int(row["poi_id"])
            for user in row["users"].split(";"):
                if user:
                    sets.setdefault(user, set()).add(poi_id)
    return sets


def poi_features(pois: Sequence[Poi]) -> list[dict]:
    return [
        point_feature(
            poi.centroid,
            {"layer": "poi", "poi_id": poi.poi_id, "n_users": len(poi.visiting_users)},
        )
        for poi in pois
    ]


# ------------------------------------------------------------ similarity

def write_similarity_csv(records: Sequence[SimilarityRecord], path: Path) -> None:
    with _writer(path) as fh:
        out = csv.writer(fh)
        out.writerow(["user_a", "user_b", "shared", "union", "score"])
        for r in records:
            out.writerow([r.user_a, r.user_b, r.shared, r.union, f"{r.score:.4f}"])


# --------------------------------------------------------- generic points

def read_points_csv(path: Path) -> list[GeoPoint]:
    """lat/lon columns from any stage CSV, for the k-dist diagnostic."""
    points: list[GeoPoint] = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            points.append(GeoPoint(float(row["lat"]), float(row["lon"])))
    return points


def write_kdist_csv(curve: Sequence[float], path: Path) -> None:
    with _writer(path) as fh:
        out = csv.writer(fh)
        out.writerow(["rank", "distance_m"])
        for rank, dist in enumerate(curve):
            out.writerow([rank, dist])
