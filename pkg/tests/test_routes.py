"""Route stringing, timetables, metrics, criteria checks, comparison, diff."""

from datetime import datetime, timedelta

import pytest

from shuttleplan.errors import ValidationError
from shuttleplan.geo import GeoPoint, destination_point, haversine_m
from shuttleplan.profiles import DriveLeg, ProfileSample, ProfileSet, TravelTimeProfile
from shuttleplan.routes import (
    ShuttleRoute,
    check_criteria,
    compare_routes,
    count_departures_near,
    departure_histogram,
    diff_routes,
    route_metrics,
    string_route,
    timetable,
    timetable_csv,
)
from shuttleplan.trips import DropOffSpot, TripRecord

from conftest import matrix_from_distances, region_of

W = GeoPoint(22.54, 114.05)
T = datetime(2019, 6, 12, 21, 55)

# three stops due north at 2/4/6 km
S0 = destination_point(W, 0, 2000)
S1 = destination_point(W, 0, 4000)
S2 = destination_point(W, 0, 6000)
SPOTS = {
    0: DropOffSpot(0, S0, "stop-a", 10),
    1: DropOffSpot(1, S1, "stop-b", 15),
    2: DropOffSpot(2, S2, "stop-c", 15),
}


def flat_profile(from_ref, to_ref, duration_s, distance_m, frm, to, interval_min=1):
    start = datetime(2019, 6, 12, 21, 0)
    samples = [
        ProfileSample(start + timedelta(minutes=i * interval_min), duration_s, distance_m, (frm, to))
        for i in range(0, 180 // interval_min)
    ]
    return TravelTimeProfile(from_ref, to_ref, samples)


def base_profiles():
    return ProfileSet(
        [
            flat_profile("workplace", 0, 300.0, 2000.0, W, S0, interval_min=5),
            flat_profile("workplace", 1, 600.0, 4000.0, W, S1, interval_min=5),
            flat_profile("workplace", 2, 900.0, 6000.0, W, S2, interval_min=5),
            flat_profile(0, 1, 300.0, 2000.0, S0, S1),
            flat_profile(1, 0, 300.0, 2000.0, S1, S0),
            flat_profile(0, 2, 600.0, 4000.0, S0, S2),
            flat_profile(2, 0, 600.0, 4000.0, S2, S0),
            flat_profile(1, 2, 300.0, 2000.0, S1, S2),
            flat_profile(2, 1, 300.0, 2000.0, S2, S1),
        ]
    )


def walk_fixture():
    # region 0: singleton spot 0 (w=10); region 1: spots 1,2 900 m apart (w=15 each)
    dist = [[0, 4000, 4000], [4000, 0, 900], [4000, 900, 0]]
    return matrix_from_distances(dist, order_counts=[10, 15, 15])


def regions_fixture():
    return [
        region_of([0], {0: 10}, region_id=0),
        region_of([1, 2], {1: 15, 2: 15}, region_id=1),
    ]


def trips_at(times, dest=S0):
    return [
        TripRecord(f"e{i}", t, t + timedelta(minutes=20), W, "x", dest, __import__("decimal").Decimal("10"))
        for i, t in enumerate(times)
    ]


def test_single_region_single_stop_route():
    regions = [region_of([0], {0: 10})]
    route = string_route(0, regions, {}, T, base_profiles(), walk_fixture(), W, SPOTS)
    assert route.stops == [(0, 0)]
    assert len(route.legs) == 1
    assert route.legs[0].duration_s == 300.0


def test_stops_ordered_by_driving_distance():
    regions = [
        region_of([2], {2: 15}, region_id=0),
        region_of([0], {0: 10}, region_id=1),
        region_of([1], {1: 15}, region_id=2),
    ]
    route = string_route(0, regions, {}, T, base_profiles(), walk_fixture(), W, SPOTS)
    assert [sid for _, sid in route.stops] == [0, 1, 2]
    # legs chain with each departure at the previous arrival
    assert route.legs[0].depart == T
    assert route.legs[1].depart == T + timedelta(seconds=300)
    assert route.legs[2].depart == T + timedelta(seconds=600)


def test_empty_overrides_select_recommended_stop():
    from shuttleplan.stops import recommend_stop

    regions = regions_fixture()
    walk = walk_fixture()
    route = string_route(0, regions, {}, T, base_profiles(), walk, W, SPOTS)
    assert dict(route.stops)[1] == recommend_stop(regions[1], walk)


def test_override_swaps_stop_and_recomputes_legs():
    regions = regions_fixture()
    walk = walk_fixture()
    base = string_route(0, regions, {}, T, base_profiles(), walk, W, SPOTS)
    assert dict(base.stops)[1] == 1  # symmetric weights tie -> smaller id
    swapped = string_route(0, regions, {1: 2}, T, base_profiles(), walk, W, SPOTS)
    assert dict(swapped.stops)[1] == 2
    assert swapped.legs[-1].to_point == S2
    assert swapped.legs[-1].distance_m == 4000.0  # leg 0->2 replaces 0->1
    with pytest.raises(ValidationError, match="not a member"):
        string_route(0, regions, {1: 0}, T, base_profiles(), walk, W, SPOTS)


def test_great_circle_fallback_when_workplace_legs_missing():
    profiles = ProfileSet(
        [
            flat_profile(0, 1, 300.0, 2000.0, S0, S1),
            flat_profile(1, 0, 300.0, 2000.0, S1, S0),
            flat_profile("workplace", 0, 300.0, 2000.0, W, S0, interval_min=5),
            flat_profile("workplace", 1, 600.0, 4000.0, W, S1, interval_min=5),
        ]
    )
    # remove a workplace leg: ordering falls back to great-circle for all
    # stops, but the chained legs still resolve from the remaining profiles
    del profiles.legs[("workplace", 1)]
    regions = [region_of([1], {1: 15}, region_id=0), region_of([0], {0: 10}, region_id=1)]
    route = string_route(0, regions, {}, T, profiles, walk_fixture(), W, SPOTS)
    assert [sid for _, sid in route.stops] == [0, 1]  # great-circle order


def test_missing_chain_leg_error_names_the_leg():
    from shuttleplan.errors import NotFoundError

    profiles = base_profiles()
    del profiles.legs[(0, 1)]
    regions = regions_fixture()
    with pytest.raises(NotFoundError, match="0->1"):
        string_route(0, regions, {}, T, profiles, walk_fixture(), W, SPOTS)


def test_timetable_single_stop():
    regions = [region_of([1], {1: 15})]
    route = string_route(0, regions, {}, T, base_profiles(), walk_fixture(), W, SPOTS)
    tt = timetable(route)
    assert tt.entries[0].arrival == datetime(2019, 6, 12, 22, 5)
    assert tt.entries[0].cumulative_distance_m == 4000.0


def test_timetable_dwell_arithmetic():
    regions = regions_fixture()
    route = string_route(0, regions, {}, T, base_profiles(), walk_fixture(), W, SPOTS)
    # legs: W->0 300 s (arrive 22:00), dwell 30, 0->1 300 s (arrive 22:05:30)
    tt = timetable(route, dwell_s=30.0)
    assert [e.arrival for e in tt.entries] == [
        datetime(2019, 6, 12, 22, 0, 0),
        datetime(2019, 6, 12, 22, 5, 30),
    ]
    arrivals = [e.arrival for e in tt.entries]
    assert arrivals == sorted(arrivals)
    cum = [e.cumulative_distance_m for e in tt.entries]
    assert cum == sorted(cum) and cum[-1] == 4000.0
    # documented example shape: 600 s + 300 s legs, dwell 30
    legs = [
        DriveLeg(W, S1, T, 600.0, 4000.0, (W, S1)),
        DriveLeg(S1, S2, T + timedelta(seconds=600), 300.0, 2000.0, (S1, S2)),
    ]
    route2 = ShuttleRoute(0, [(0, 1), (1, 2)], T, legs)
    tt2 = timetable(route2, dwell_s=30.0)
    assert [e.arrival for e in tt2.entries] == [
        datetime(2019, 6, 12, 22, 5, 0),
        datetime(2019, 6, 12, 22, 10, 30),
    ]
    tt0 = timetable(route2, dwell_s=0.0)
    assert [e.arrival for e in tt0.entries] == [
        datetime(2019, 6, 12, 22, 5, 0),
        datetime(2019, 6, 12, 22, 10, 0),
    ]


def test_route_metrics_weighted_walk_aggregation():
    regions = regions_fixture()
    walk = walk_fixture()
    route = string_route(0, regions, {}, T, base_profiles(), walk, W, SPOTS)
    m = route_metrics(route, [], walk, regions)
    # region 0 reach800 = 1.0 (w=10); region 1 stop 1: member 2 at 900 -> 0.5 (w=30)
    assert m.walk_reach800 == pytest.approx((10 * 1.0 + 30 * 0.5) / 40)
    # driving duration includes one dwell, distance does not
    assert m.driving_dura == pytest.approx(300 + 300 + 30)
    assert m.driving_dist == pytest.approx(4000.0)
    tt = timetable(route)
    assert m.driving_dist == tt.entries[-1].cumulative_distance_m
    assert (tt.entries[-1].arrival - T).total_seconds() == pytest.approx(m.driving_dura)


def test_route_metrics_singleton_trivial():
    regions = [region_of([0], {0: 10})]
    walk = walk_fixture()
    route = string_route(0, regions, {}, T, base_profiles(), walk, W, SPOTS)
    m = route_metrics(route, [], walk, regions)
    assert m.walk_avg_dist == 0.0
    assert m.walk_avg_dura == 0.0
    assert m.walk_reach800 == 1.0
    assert m.driving_dura == 300.0


def test_nums_window():
    trips = trips_at(
        [T + timedelta(minutes=d) for d in (-11, -10, -3, 0, 9, 10, 11, 40)]
    )
    # inclusive bounds: -10, -3, 0, 9, 10 are in; -11, 11, 40 are out
    assert count_departures_near(trips, T, 10.0) == 5


def test_departure_histogram_basics():
    assert departure_histogram([], 5) == []
    times = (
        [datetime(2019, 6, 12, 21, 30) + timedelta(minutes=m) for m in (0, 1, 2, 2, 3)]
        + [datetime(2019, 6, 12, 21, 55) + timedelta(minutes=m) for m in (0, 0, 1)]
        + [datetime(2019, 6, 12, 21, 43)]
    )
    hist = departure_histogram(trips_at(times), 5)
    assert sum(c for _, c in hist) == len(times)
    by_start = dict(hist)
    assert by_start[datetime(2019, 6, 12, 21, 30)] == 5
    assert by_start[datetime(2019, 6, 12, 21, 55)] == 3
    assert by_start[datetime(2019, 6, 12, 21, 40)] == 1
    # contiguous bins, aligned to the 5-minute grid from midnight
    starts = [s for s, _ in hist]
    assert starts == sorted(starts)
    assert all(s.minute % 5 == 0 and s.second == 0 for s in starts)
    assert len(starts) == 6  # 21:30 .. 21:55 inclusive
    with pytest.raises(ValidationError):
        departure_histogram([], 0)


def test_check_criteria_clean_outbound():
    regions = regions_fixture()
    route = string_route(0, regions, {}, T, base_profiles(), walk_fixture(), W, SPOTS)
    assert check_criteria(route, W) == []


def test_check_criteria_move_forward_violation():
    legs = [
        DriveLeg(W, S1, T, 600.0, 4000.0, (W, S1)),
        DriveLeg(S1, S0, T, 300.0, 2000.0, (S1, S0)),  # back toward workplace
    ]
    route = ShuttleRoute(0, [(0, 1), (1, 0)], T, legs)
    warnings = check_criteria(route, W)
    assert any(w.startswith("move-forward") and "0" in w and "1" in w for w in warnings)
    assert any(w.startswith("leg-regression") for w in warnings)


def test_check_criteria_zigzag_angle_reported():
    a = destination_point(W, 0, 3000)
    b = destination_point(a, 120, 3000)
    legs = [
        DriveLeg(W, a, T, 300.0, 3000.0, (W, a)),
        DriveLeg(a, b, T, 300.0, 3000.0, (a, b)),
    ]
    route = ShuttleRoute(0, [(0, 0), (1, 1)], T, legs)
    warnings = check_criteria(route, W)
    zig = [w for w in warnings if w.startswith("zigzag")]
    assert len(zig) == 1
    assert "120" in zig[0]


def test_compare_routes_identical_and_bounds():
    regions = regions_fixture()
    walk = walk_fixture()
    route = string_route(0, regions, {}, T, base_profiles(), walk, W, SPOTS)
    payload = compare_routes([("a", route), ("b", route)], [], walk, regions)
    assert payload.entries[0].normalized == payload.entries[1].normalized
    assert all(v == 1.0 for v in payload.entries[0].normalized.values())
    for e in payload.entries:
        assert all(0.0 <= v <= 1.0 for v in e.normalized.values())
    axes = {a["key"]: a["lower_is_better"] for a in payload.axes}
    assert axes["driving_dist"] is True
    assert axes["nums"] is False
    with pytest.raises(ValidationError):
        compare_routes([("x", route)] * 4, [], walk, regions)


def test_compare_routes_min_maps_to_zero_max_to_one():
    regions = regions_fixture()
    walk = walk_fixture()
    early = string_route(0, regions, {}, T, base_profiles(), walk, W, SPOTS)
    trips = trips_at([T + timedelta(minutes=m) for m in (-5, 0, 5)])
    late = string_route(
        0, regions, {}, T + timedelta(hours=1), base_profiles(), walk, W, SPOTS
    )
    payload = compare_routes([("early", early), ("late", late)], trips, walk, regions)
    norm_nums = [e.normalized["nums"] for e in payload.entries]
    assert sorted(norm_nums) == [0.0, 1.0]


def test_diff_identical_routes_zero_deltas():
    regions = regions_fixture()
    walk = walk_fixture()
    route = string_route(0, regions, {}, T, base_profiles(), walk, W, SPOTS)
    ref_stops = [SPOTS[sid].location for _, sid in route.stops]
    report = diff_routes(
        route, ref_stops, T, [], walk, SPOTS, [0, 1, 2], base_profiles(), W
    )
    for d in report.spot_deltas:
        assert d.delta_m == 0.0
    assert report.ours.driving_dist == report.reference.driving_dist
    assert report.unmatched_reference_stops == []


def test_diff_detour_reference_costs_driving():
    regions = regions_fixture()
    walk = walk_fixture()
    ours = string_route(0, regions, {}, T, base_profiles(), walk, W, SPOTS)
    # reference visits every spot: 0 -> 1 -> 2
    ref_stops = [S0, S1, S2]
    report = diff_routes(
        ours, ref_stops, T, [], walk, SPOTS, [0, 1, 2], base_profiles(), W
    )
    assert report.reference.driving_dura > report.ours.driving_dura
    # visiting every spot can only help walking access
    assert report.reference.walk_avg_dist <= report.ours.walk_avg_dist
    assert report.reference.walk_reach800 >= report.ours.walk_reach800


def test_diff_reference_missing_demand_cluster_loses_reach():
    regions = regions_fixture()
    walk = walk_fixture()
    ours = string_route(0, regions, {}, T, base_profiles(), walk, W, SPOTS)
    report = diff_routes(
        ours, [S0], T, [], walk, SPOTS, [0, 1, 2], base_profiles(), W
    )
    assert report.reference.walk_reach800 < report.ours.walk_reach800


def test_diff_snaps_within_300m_else_free_point():
    regions = regions_fixture()
    walk = walk_fixture()
    ours = string_route(0, regions, {}, T, base_profiles(), walk, W, SPOTS)
    near = destination_point(S0, 90, 250)       # snaps to spot 0
    far = destination_point(S0, 90, 1500)       # free point, zero demand
    report = diff_routes(
        ours, [near, far], T, [], walk, SPOTS, [0, 1, 2], base_profiles(), W
    )
    assert len(report.unmatched_reference_stops) == 1
    assert haversine_m(report.unmatched_reference_stops[0], far) < 1e-6


def test_time_translation_of_route_legs():
    """Shifting every profile sample and the departure by the same delta
    reproduces identical legs."""
    regions = regions_fixture()
    walk = walk_fixture()
    delta = timedelta(minutes=47)
    base = base_profiles()
    shifted = ProfileSet()
    for (a, b), p in base.legs.items():
        shifted.add(
            TravelTimeProfile(
                a,
                b,
                [ProfileSample(s.depart + delta, s.duration_s, s.distance_m, s.polyline) for s in p.samples],
            )
        )
    r1 = string_route(0, regions, {}, T, base, walk, W, SPOTS)
    r2 = string_route(0, regions, {}, T + delta, shifted, walk, W, SPOTS)
    assert [s for s in r1.stops] == [s for s in r2.stops]
    for l1, l2 in zip(r1.legs, r2.legs):
        assert abs(l1.duration_s - l2.duration_s) < 1e-9
        assert l1.distance_m == l2.distance_m
        assert l2.depart - l1.depart == delta


def test_timetable_csv_export():
    regions = regions_fixture()
    route = string_route(0, regions, {}, T, base_profiles(), walk_fixture(), W, SPOTS)
    text = timetable_csv(timetable(route), SPOTS)
    lines = text.strip().split("\n")
    assert lines[0] == "seq,region_id,spot_name,arrival_iso,cumulative_km"
    assert len(lines) == 3
    assert "stop-a" in lines[1]
