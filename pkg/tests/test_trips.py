import io
from decimal import Decimal

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shuttleplan.errors import ValidationError
from shuttleplan.geo import GeoPoint, destination_point, haversine_m
from shuttleplan.trips import (
    parse_trips,
    trips_csv_text,
    unify_locations,
    unify_points,
    write_trips_csv,
)

WORKPLACE = GeoPoint(22.54, 114.05)

HEADER = "employee_id,departure_time,arrival_time,origin_lat,origin_lon,dest_name,dest_lat,dest_lon,payment"


def row(emp="e1", dep="2019-06-12T21:30:00", arr="2019-06-12T21:50:00", dest="home",
        dlat=22.58, dlon=114.09, pay="25.50"):
    return f"{emp},{dep},{arr},{WORKPLACE.lat},{WORKPLACE.lon},{dest},{dlat},{dlon},{pay}"


def test_parse_three_valid_rows():
    text = "\n".join([HEADER, row("e1"), row("e2"), row("e3")]) + "\n"
    result = parse_trips(io.StringIO(text), WORKPLACE)
    assert len(result.records) == 3
    assert result.rejects == []
    assert result.records[0].payment == Decimal("25.50")


def test_arrival_before_departure_rejected_with_reason():
    text = "\n".join([HEADER, row(arr="2019-06-12T21:00:00")]) + "\n"
    result = parse_trips(io.StringIO(text), WORKPLACE)
    assert result.records == []
    assert len(result.rejects) == 1
    assert result.rejects[0].line_no == 2
    assert "arrival_time < departure_time" in result.rejects[0].reason


def test_malformed_header_is_fatal():
    with pytest.raises(ValidationError):
        parse_trips(io.StringIO("a,b,c\n1,2,3\n"), WORKPLACE)


def test_bad_rows_collected_not_dropped():
    rows = [
        HEADER,
        row("good"),
        row("badlat", dlat=123.0),
        row("badpay", pay="not-a-number"),
        row("wrongorigin").replace(str(WORKPLACE.lat), "22.9", 1),
    ]
    result = parse_trips(io.StringIO("\n".join(rows) + "\n"), WORKPLACE)
    assert [r.employee_id for r in result.records] == ["good"]
    assert len(result.rejects) == 3
    reasons = " | ".join(r.reason for r in result.rejects)
    assert "destination" in reasons
    assert "payment" in reasons
    assert "origin" in reasons


def test_serialize_parse_round_trip_is_identity(small_dataset):
    records = small_dataset.trips[:1000]
    text = trips_csv_text(records)
    back = parse_trips(io.StringIO(text), records[0].origin)
    assert back.rejects == []
    assert back.records == records
    # and byte-level: serializing the re-parsed records gives identical text
    assert trips_csv_text(back.records) == text


def make_records(points, names=None):
    names = names or [f"p{i}" for i in range(len(points))]
    text_rows = [HEADER]
    for (p, name) in zip(points, names):
        text_rows.append(row(dest=name, dlat=p.lat, dlon=p.lon))
    return parse_trips(io.StringIO("\n".join(text_rows) + "\n"), WORKPLACE).records


def test_unify_two_close_destinations_merge():
    a = destination_point(WORKPLACE, 90, 3000)
    b = destination_point(a, 0, 50)
    spots, assignment = unify_locations(make_records([a, b]), radius_m=150)
    assert len(spots) == 1
    assert spots[0].order_count == 2
    assert assignment == {0: 0, 1: 0}


def test_unify_two_far_destinations_stay_apart():
    a = destination_point(WORKPLACE, 90, 3000)
    b = destination_point(a, 0, 200)
    spots, _ = unify_locations(make_records([a, b]), radius_m=150)
    assert len(spots) == 2


def test_unify_chain_merges_by_single_linkage():
    # A-B 100 m, B-C 100 m, A-C 190 m: chain connects all three
    b = destination_point(WORKPLACE, 45, 3000)
    a = destination_point(b, 287, 100)   # ~100 m away
    c = destination_point(b, 107, 100)
    assert haversine_m(a, c) > 150  # A and C alone would not merge
    spots, assignment = unify_locations(make_records([a, b, c]), radius_m=150)
    assert len(spots) == 1
    assert spots[0].order_count == 3


def test_unify_name_is_most_frequent_then_lexicographic():
    base = destination_point(WORKPLACE, 10, 2500)
    near = [destination_point(base, 0, d) for d in (0, 10, 20, 30)]
    spots, _ = unify_locations(make_records(near, names=["b", "a", "b", "a"]), radius_m=150)
    assert len(spots) == 1
    assert spots[0].name == "a"  # tie 2-2 -> lexicographically smallest


def test_unify_order_counts_sum_to_accepted_records(small_dataset):
    records = small_dataset.trips
    spots, assignment = unify_locations(records)
    assert sum(s.order_count for s in spots) == len(records)
    assert set(assignment) == set(range(len(records)))


def test_unify_idempotent_on_unified_spots(small_dataset):
    spots, _ = unify_locations(small_dataset.trips)
    again, assignment = unify_points(
        [s.location for s in spots],
        [s.order_count for s in spots],
        [s.name for s in spots],
    )
    assert len(again) == len(spots)
    assert [s.order_count for s in again] == [s.order_count for s in spots]
    assert [s.name for s in again] == [s.name for s in spots]
    for old, new in zip(spots, again):
        assert haversine_m(old.location, new.location) < 1e-6
    assert assignment == list(range(len(spots)))


@settings(max_examples=30, deadline=None)
@given(
    st.lists(
        st.tuples(st.floats(0, 359.99), st.floats(0, 4000)),
        min_size=1,
        max_size=25,
    )
)
def test_unify_spots_always_separated_beyond_radius(polar):
    """After unification no two spot centroids sit within the radius."""
    points = [destination_point(WORKPLACE, b, d) for b, d in polar]
    spots, assignment = unify_points(points, [1] * len(points), ["x"] * len(points), radius_m=150)
    for i, a in enumerate(spots):
        for b in spots[i + 1:]:
            assert haversine_m(a.location, b.location) > 150
    assert sum(s.order_count for s in spots) == len(points)


def test_write_trips_csv_and_text_agree(small_dataset):
    buf = io.StringIO()
    write_trips_csv(small_dataset.trips[:5], buf)
    assert buf.getvalue() == trips_csv_text(small_dataset.trips[:5])
