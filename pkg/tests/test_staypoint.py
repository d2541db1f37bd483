"""Dwell detection on planted synthetic trajectories plus the scan's properties."""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from poimine.geo import GeoPoint, Trajectory, haversine_distance
from poimine.staypoint import StayPoint, StayPointParams, detect_stay_points

from support import T0, dwell_fixes, fix_at, offset_point

BASE = GeoPoint(39.98, 116.32)


def drive_trajectory(speed_mps: float = 15.0, step_s: float = 5.0, n: int = 265) -> Trajectory:
    """Straight constant-speed drive; 265 fixes at 5 s spacing span 22 min."""
    fixes = [
        fix_at(offset_point(BASE, i * speed_mps * step_s, 0.0), i * step_s) for i in range(n)
    ]
    return Trajectory("u", tuple(fixes))


class TestPlantedDwell:
    def test_dwell_in_small_circle_yields_one_stay_point(self):
        # 26 fixes a minute apart inside a 50 m circle: 25 min > 20 min
        fixes = dwell_fixes(BASE, T0, n_fixes=26, step_s=60.0, radius_m=50.0)
        result = detect_stay_points(Trajectory("u", tuple(fixes)))
        assert len(result) == 1
        sp = result[0]
        assert sp.fix_count == 26
        assert sp.duration_s == 25 * 60.0
        assert haversine_distance(sp.centroid, BASE) < 5.0
        assert sp.user_id == "u"

    def test_short_dwell_not_emitted(self):
        # 15 min < 20 min threshold
        fixes = dwell_fixes(BASE, T0, n_fixes=16, step_s=60.0, radius_m=50.0)
        assert detect_stay_points(Trajectory("u", tuple(fixes))) == []

    def test_threshold_is_strict(self):
        # exactly 20 min is not "greater than" the threshold
        fixes = dwell_fixes(BASE, T0, n_fixes=21, step_s=60.0, radius_m=50.0)
        assert detect_stay_points(Trajectory("u", tuple(fixes))) == []

    def test_single_fix_empty(self):
        assert detect_stay_points(Trajectory("u", (fix_at(BASE, 0.0),))) == []

    def test_two_dwells_with_travel_between(self):
        far = offset_point(BASE, 5000.0, 0.0)
        first = dwell_fixes(BASE, T0, 26, 60.0, 40.0)
        # hop over in two large steps so each leg is a clean > 200 m break
        hop = [
            fix_at(offset_point(BASE, 2500.0, 0.0), 26 * 60.0),
            fix_at(far, 27 * 60.0),
        ]
        second = dwell_fixes(far, hop[-1].timestamp, 26, 60.0, 40.0)
        fixes = first + hop + second[1:]
        result = detect_stay_points(Trajectory("u", tuple(fixes)))
        assert len(result) == 2
        assert haversine_distance(result[0].centroid, BASE) < 10.0
        assert haversine_distance(result[1].centroid, far) < 10.0
        assert result[0].departure < result[1].arrival


class TestDriveModes:
    def test_consecutive_rule_accumulates_slow_drive(self):
        # every 75 m step is under the 200 m radius, so the literal
        # consecutive-pair rule grows one run over the whole 22 min drive
        t = drive_trajectory()
        result = detect_stay_points(t, StayPointParams(anchored=False))
        assert len(result) == 1
        assert result[0].fix_count == len(t)

    def test_anchored_rule_rejects_drive(self):
        # measured from each run's first fix the run breaks within ~200 m,
        # far too quickly to ever cover 20 minutes
        t = drive_trajectory()
        assert detect_stay_points(t, StayPointParams(anchored=True)) == []

    def test_anchored_still_finds_true_dwell(self):
        fixes = dwell_fixes(BASE, T0, n_fixes=26, step_s=60.0, radius_m=50.0)
        result = detect_stay_points(Trajectory("u", tuple(fixes)), StayPointParams(anchored=True))
        assert len(result) == 1
        assert haversine_distance(result[0].centroid, BASE) < 5.0


class TestParams:
    @pytest.mark.parametrize("dist,time", [(0.0, 60.0), (-5.0, 60.0), (100.0, 0.0), (100.0, -1.0)])
    def test_thresholds_must_be_positive(self, dist, time):
        with pytest.raises(ValueError):
            StayPointParams(dist_threshold_m=dist, time_threshold_s=time)


@st.composite
def mixed_trajectories(draw):
    """Alternating dwell-ish and travel-ish segments with varied durations."""
    segments = draw(st.integers(min_value=1, max_value=5))
    fixes = []
    cursor_north = 0.0
    seconds = 0.0
    for _ in range(segments):
        kind = draw(st.sampled_from(["dwell", "travel"]))
        n = draw(st.integers(min_value=2, max_value=12))
        if kind == "dwell":
            step_s = draw(st.sampled_from([60.0, 180.0, 300.0]))
            radius = draw(st.sampled_from([10.0, 40.0, 90.0]))
            center = offset_point(BASE, cursor_north, 0.0)
            for i in range(n):
                angle = 2.0 * math.pi * i / n
                p = offset_point(center, radius * math.sin(angle), radius * math.cos(angle))
                fixes.append(fix_at(p, seconds))
                seconds += step_s
        else:
            step_m = draw(st.sampled_from([250.0, 400.0, 800.0]))
            for _ in range(n):
                cursor_north += step_m
                fixes.append(fix_at(offset_point(BASE, cursor_north, 0.0), seconds))
                seconds += draw(st.sampled_from([30.0, 60.0]))
    return Trajectory("u", tuple(fixes))


def member_fixes(t: Trajectory, sp: StayPoint):
    return [f for f in t.fixes if sp.arrival <= f.timestamp <= sp.departure]


class TestScanProperties:
    @pytest.mark.invariant("staypoint", "duration-exceeds-threshold")
    @settings(max_examples=50)
    @given(mixed_trajectories())
    def test_every_stay_point_outlasts_threshold(self, t):
        params = StayPointParams()
        for sp in detect_stay_points(t, params):
            assert sp.duration_s > params.time_threshold_s
            assert sp.fix_count >= 2

    @pytest.mark.invariant("staypoint", "disjoint-contiguous-runs")
    @settings(max_examples=50)
    @given(mixed_trajectories())
    def test_runs_are_disjoint_contiguous_and_ordered(self, t):
        result = detect_stay_points(t)
        for sp in result:
            # contiguity: with strictly increasing timestamps, the member
            # count inside [arrival, departure] must equal fix_count
            assert len(member_fixes(t, sp)) == sp.fix_count
        for a, b in zip(result, result[1:]):
            assert a.departure < b.arrival

    @pytest.mark.invariant("staypoint", "centroid-in-bbox")
    @settings(max_examples=50)
    @given(mixed_trajectories())
    def test_centroid_inside_member_bounding_box(self, t):
        for sp in detect_stay_points(t):
            members = member_fixes(t, sp)
            lats = [f.point.lat for f in members]
            lons = [f.point.lon for f in members]
            assert min(lats) - 1e-9 <= sp.centroid.lat <= max(lats) + 1e-9
            assert min(lons) - 1e-9 <= sp.centroid.lon <= max(lons) + 1e-9

    @pytest.mark.invariant("staypoint", "time-threshold-monotonicity")
    @settings(max_examples=50)
    @given(mixed_trajectories(), st.booleans())
    def test_raising_time_threshold_never_adds_stay_points(self, t, anchored):
        lo = detect_stay_points(t, StayPointParams(time_threshold_s=600.0, anchored=anchored))
        hi = detect_stay_points(t, StayPointParams(time_threshold_s=1800.0, anchored=anchored))
        assert len(hi) <= len(lo)
