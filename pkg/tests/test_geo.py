import math

import pytest

from shuttleplan.geo import GeoPoint, LocalProjection, bearing_deg, destination_point, haversine_m


def test_haversine_zero_for_same_point():
    p = GeoPoint(22.5, 114.0)
    assert haversine_m(p, p) == 0.0


def test_haversine_one_degree_longitude_on_equator():
    # one degree of arc = 2*pi*R / 360
    d = haversine_m(GeoPoint(0, 0), GeoPoint(0, 1))
    assert abs(d - 111_195.0) < 1.0


def test_haversine_symmetric_exactly():
    a = GeoPoint(22.51, 114.02)
    b = GeoPoint(22.60, 114.11)
    assert haversine_m(a, b) == haversine_m(b, a)


@pytest.mark.parametrize(
    "dest, expected",
    [
        (GeoPoint(1, 0), 0.0),
        (GeoPoint(0, 1), 90.0),
        (GeoPoint(-1, 0), 180.0),
        (GeoPoint(0, -1), 270.0),
    ],
)
def test_bearing_cardinal_directions(dest, expected):
    assert bearing_deg(GeoPoint(0, 0), dest) == pytest.approx(expected, abs=1e-9)


def test_bearing_undefined_for_coincident_points():
    p = GeoPoint(10, 10)
    with pytest.raises(ValueError):
        bearing_deg(p, p)


def test_geopoint_rejects_out_of_range():
    with pytest.raises(ValueError):
        GeoPoint(91, 0)
    with pytest.raises(ValueError):
        GeoPoint(0, 200)


def test_destination_point_round_trip():
    origin = GeoPoint(22.54, 114.05)
    for bearing in (0, 45, 137, 250, 359):
        for dist in (150, 2_000, 12_000):
            p = destination_point(origin, bearing, dist)
            assert haversine_m(origin, p) == pytest.approx(dist, rel=1e-9)
            assert bearing_deg(origin, p) == pytest.approx(bearing, abs=1e-6)


def test_local_projection_round_trip_and_scale():
    proj = LocalProjection(GeoPoint(22.54, 114.05))
    p = GeoPoint(22.58, 114.11)
    x, y = proj.forward(p)
    # x/y are meters: hypot equals the great-circle distance through center
    assert math.hypot(x, y) == pytest.approx(haversine_m(proj.center, p), rel=1e-12)
    back = proj.inverse(x, y)
    assert haversine_m(p, back) < 1e-6
