"""Geodesy primitives against independent oracles and their stated properties."""

import math
import statistics
from datetime import timedelta

import pytest
from hypothesis import given
from hypothesis import strategies as st

from poimine.geo import (
    EARTH_RADIUS_M,
    GeoPoint,
    GpsFix,
    Trajectory,
    centroid,
    haversine_distance,
    speed_between,
)

from support import T0, fix_at, offset_point

lats = st.floats(min_value=-90.0, max_value=90.0, allow_nan=False)
lons = st.floats(min_value=-180.0, max_value=180.0, allow_nan=False)
geo_points = st.builds(GeoPoint, lats, lons)


def law_of_cosines_distance(a: GeoPoint, b: GeoPoint) -> float:
    """Independent spherical-law-of-cosines oracle for the great-circle distance."""
    p1, p2 = math.radians(a.lat), math.radians(b.lat)
    dl = math.radians(b.lon - a.lon)
    cos_angle = math.sin(p1) * math.sin(p2) + math.cos(p1) * math.cos(p2) * math.cos(dl)
    return EARTH_RADIUS_M * math.acos(max(-1.0, min(1.0, cos_angle)))


class TestGeoPoint:
    def test_valid_construction(self):
        p = GeoPoint(39.9042, 116.4074)
        assert p.lat == 39.9042 and p.lon == 116.4074

    @pytest.mark.parametrize("lat,lon", [(91.0, 0.0), (-90.5, 0.0), (0.0, 180.1), (0.0, -181.0)])
    def test_out_of_range_rejected(self, lat, lon):
        with pytest.raises(ValueError):
            GeoPoint(lat, lon)

    @pytest.mark.parametrize("lat,lon", [(float("nan"), 0.0), (0.0, float("inf"))])
    def test_non_finite_rejected(self, lat, lon):
        with pytest.raises(ValueError):
            GeoPoint(lat, lon)


class TestHaversine:
    def test_identical_points_zero(self):
        p = GeoPoint(30.0, 120.0)
        assert haversine_distance(p, p) == 0.0

    def test_beijing_shanghai_matches_law_of_cosines(self):
        a = GeoPoint(39.9042, 116.4074)
        b = GeoPoint(31.2304, 121.4737)
        got = haversine_distance(a, b)
        want = law_of_cosines_distance(a, b)
        assert got == pytest.approx(want, rel=1e-3)
        # sanity: Beijing to Shanghai is on the order of a thousand km
        assert 1_000_000 < got < 1_200_000

    @given(geo_points, geo_points)
    def test_symmetry(self, a, b):
        assert haversine_distance(a, b) == haversine_distance(b, a)

    @given(geo_points, geo_points)
    def test_non_negative(self, a, b):
        assert haversine_distance(a, b) >= 0.0

    @pytest.mark.invariant("geo_core", "distance-symmetry")
    @given(geo_points, geo_points)
    def test_swap_invariance_property(self, a, b):
        assert haversine_distance(a, b) == haversine_distance(b, a)

    @pytest.mark.invariant("geo_core", "triangle-inequality")
    @given(geo_points, geo_points, geo_points)
    def test_triangle_inequality(self, a, b, c):
        d_ac = haversine_distance(a, c)
        d_ab = haversine_distance(a, b)
        d_bc = haversine_distance(b, c)
        assert d_ac <= (d_ab + d_bc) * (1.0 + 1e-6) + 1e-9


class TestCentroid:
    def test_singleton(self):
        assert centroid([GeoPoint(10.0, 10.0)]) == GeoPoint(10.0, 10.0)

    def test_midpoint_by_symmetry(self):
        assert centroid([GeoPoint(0.0, 0.0), GeoPoint(0.0, 2.0)]) == GeoPoint(0.0, 1.0)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            centroid([])

    def test_matches_reference_mean_on_random_cloud(self):
        # independent one-line mean oracle over 100 points near Beijing
        base = GeoPoint(39.98, 116.32)
        pts = [
            offset_point(base, (i * 37 % 100) - 50.0, (i * 61 % 100) - 50.0)
            for i in range(100)
        ]
        got = centroid(pts)
        assert got.lat == statistics.fmean(p.lat for p in pts)
        assert got.lon == statistics.fmean(p.lon for p in pts)

    @pytest.mark.invariant("geo_core", "centroid-permutation")
    @given(st.lists(geo_points, min_size=1, max_size=40), st.randoms(use_true_random=False))
    def test_permutation_invariance(self, pts, rng):
        shuffled = list(pts)
        rng.shuffle(shuffled)
        assert centroid(pts) == centroid(shuffled)

    @given(st.lists(geo_points, min_size=1, max_size=40))
    def test_inside_bounding_box(self, pts):
        c = centroid(pts)
        assert min(p.lat for p in pts) - 1e-9 <= c.lat <= max(p.lat for p in pts) + 1e-9
        assert min(p.lon for p in pts) - 1e-9 <= c.lon <= max(p.lon for p in pts) + 1e-9


class TestSpeedBetween:
    def test_stationary(self):
        p = GeoPoint(40.0, 116.0)
        assert speed_between(fix_at(p, 0), fix_at(p, 10)) == 0.0

    def test_thousand_meters_hundred_seconds(self):
        a = GeoPoint(40.0, 116.0)
        b = offset_point(a, 1000.0, 0.0)
        # oracle: the same distance function over the elapsed time
        want = haversine_distance(a, b) / 100.0
        got = speed_between(fix_at(a, 0), fix_at(b, 100))
        assert got == want
        assert got == pytest.approx(10.0, rel=1e-6)

    def test_equal_timestamps_rejected(self):
        p = GeoPoint(40.0, 116.0)
        with pytest.raises(ValueError):
            speed_between(fix_at(p, 5), fix_at(p, 5))

    def test_backwards_time_rejected(self):
        p = GeoPoint(40.0, 116.0)
        with pytest.raises(ValueError):
            speed_between(fix_at(p, 10), fix_at(p, 5))


class TestTrajectory:
    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            Trajectory("u", ())

    def test_basic_accessors(self):
        p = GeoPoint(40.0, 116.0)
        t = Trajectory("u", (fix_at(p, 0), fix_at(p, 60)))
        assert len(t) == 2
        assert t.start == T0
        assert t.end == T0 + timedelta(seconds=60)
