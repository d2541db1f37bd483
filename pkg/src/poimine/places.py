"""Two-level place abstraction built on density clustering.

Level one: a user's stay points cluster into location points, the places
that user visits repeatedly (each member stay point is one visit). Level
two: all users' location points pool into community points of interest.
Noise at either level is discarded rather than propagated.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .clustering import DbscanParams, dbscan
from .geo import GeoPoint, centroid
from .staypoint import StayPoint

DEFAULT_LP_EPS_M = 100.0
DEFAULT_LP_MIN_PTS = 4
DEFAULT_POI_EPS_M = 200.0
DEFAULT_POI_MIN_PTS = 4


@dataclass(frozen=True)
class LocationPoint:
    """A frequent place of one user: a cluster of that user's stay points.

    stay_point_ids are indices into the stay-point sequence the cluster was
    extracted from; visit_count is the number of member stay points.
    """

    user_id: str
    centroid: GeoPoint
    stay_point_ids: tuple[int, ...]
    visit_count: int


@dataclass(frozen=True)
class Poi:
    """A community place: a cluster of location points pooled across users.

    member_location_points are indices into the pooled location-point
    sequence; visiting_users are the owners of those members.
    """

    poi_id: int
    centroid: GeoPoint
    member_location_points: tuple[int, ...]
    visiting_users: frozenset[str]


def extract_location_points(
    stay_points: Sequence[StayPoint],
    eps_m: float = DEFAULT_LP_EPS_M,
    min_pts: int = DEFAULT_LP_MIN_PTS,
) -> list[LocationPoint]:
    """Cluster one user's stay points; every non-noise cluster is a place.

    All stay points must belong to the same user. Fewer than min_pts stay
    points can never form a cluster, so the result is empty.
    """
    if not stay_points:
        return []
    owners = {sp.user_id for sp in stay_points}
    if len(owners) != 1:
        raise ValueError(f"stay points span multiple users: {sorted(owners)}")
    user_id = stay_points[0].user_id
    assignment = dbscan([sp.centroid for sp in stay_points], DbscanParams(eps_m, min_pts))
    places: list[LocationPoint] = []
    for members in assignment.clusters():
        places.append(
            LocationPoint(
                user_id=user_id,
                centroid=centroid([stay_points[m].centroid for m in members]),
                stay_point_ids=tuple(members),
                visit_count=len(members),
            )
        )
    return places


def extract_pois(
    location_points: Sequence[LocationPoint],
    eps_m: float = DEFAULT_POI_EPS_M,
    min_pts: int = DEFAULT_POI_MIN_PTS,
    min_users: int = 1,
) -> list[Poi]:
    """Cluster pooled location points from any number of users into POIs.

    min_users optionally demands that a cluster cover several distinct
    users; the default of 1 accepts any dense cluster. POI ids are dense in
    discovery order after that filter.
    """
    if not location_points:
        return []
    assignment = dbscan([lp.centroid for lp in location_points], DbscanParams(eps_m, min_pts))
    pois: list[Poi] = []
    for members in assignment.clusters():
        users = frozenset(location_points[m].user_id for m in members)
        if len(users) < min_users:
            continue
        pois.append(
            Poi(
                poi_id=len(pois),
                centroid=centroid([location_points[m].centroid for m in members]),
                member_location_points=tuple(members),
                visiting_users=users,
            )
        )
    return pois


def user_poi_sets(
    pois: Sequence[Poi], users: Iterable[str] | None = None
) -> dict[str, set[int]]:
    """Map each user to the set of POI ids they visit.

    Pass the full user universe via ``users`` to keep users whose places all
    dissolved into noise present with an empty set.
    """
    sets: dict[str, set[int]] = {u: set() for u in users} if users is not None else {}
    for poi in pois:
        for user in poi.visiting_users:
            sets.setdefault(user, set()).add(poi.poi_id)
    return sets
