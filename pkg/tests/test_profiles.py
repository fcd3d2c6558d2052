import io
from datetime import datetime, timedelta

import pytest

from shuttleplan.errors import NotFoundError, ValidationError
from shuttleplan.geo import GeoPoint
from shuttleplan.profiles import (
    ProfileSample,
    ProfileSet,
    TravelTimeProfile,
    drive_leg,
    load_profiles,
    profiles_json_text,
)

A = GeoPoint(22.54, 114.05)
B = GeoPoint(22.58, 114.09)
T0 = datetime(2019, 6, 12, 21, 30)


def sample(minute_offset, duration_s, distance_m=5000.0):
    return ProfileSample(
        depart=T0 + timedelta(minutes=minute_offset),
        duration_s=duration_s,
        distance_m=distance_m,
        polyline=(A, B),
    )


def profile_set(samples, from_ref="workplace", to_ref=3):
    return ProfileSet([TravelTimeProfile(from_ref, to_ref, samples)])


def test_exact_sample_returned_verbatim():
    ps = profile_set([sample(0, 600.0), sample(5, 660.0)])
    leg = drive_leg(ps, "workplace", 3, T0)
    assert leg.duration_s == 600.0
    assert leg.distance_m == 5000.0
    assert leg.polyline == (A, B)
    assert not leg.extrapolated


def test_duration_interpolates_between_brackets():
    # samples at 21:30 (600 s) and 21:32 (660 s): depart 21:31 -> 630 s
    ps = profile_set([sample(0, 600.0), sample(2, 660.0)])
    leg = drive_leg(ps, "workplace", 3, T0 + timedelta(minutes=1))
    assert leg.duration_s == pytest.approx(630.0, abs=1e-9)
    assert not leg.extrapolated


def test_equidistant_depart_takes_earlier_sample_geometry():
    early = ProfileSample(T0, 600.0, 4000.0, (A, B))
    late = ProfileSample(T0 + timedelta(minutes=2), 660.0, 6000.0, (B, A))
    ps = ProfileSet([TravelTimeProfile("workplace", 3, [early, late])])
    leg = drive_leg(ps, "workplace", 3, T0 + timedelta(minutes=1))
    assert leg.distance_m == 4000.0      # earlier sample's distance
    assert leg.polyline == (A, B)        # earlier sample's path
    assert leg.duration_s == pytest.approx(630.0)


def test_depart_before_range_clamps_and_flags():
    ps = profile_set([sample(0, 600.0), sample(5, 660.0)])
    leg = drive_leg(ps, "workplace", 3, T0 - timedelta(minutes=30))
    assert leg.duration_s == 600.0
    assert leg.extrapolated


def test_depart_after_range_clamps_and_flags():
    ps = profile_set([sample(0, 600.0), sample(5, 660.0)])
    leg = drive_leg(ps, "workplace", 3, T0 + timedelta(hours=2))
    assert leg.duration_s == 660.0
    assert leg.extrapolated


def test_missing_leg_is_an_error():
    ps = profile_set([sample(0, 600.0)])
    with pytest.raises(NotFoundError, match="workplace->4"):
        drive_leg(ps, "workplace", 4, T0)


def test_unsorted_samples_rejected():
    with pytest.raises(ValidationError, match="not strictly sorted"):
        ProfileSet([TravelTimeProfile("workplace", 3, [sample(5, 660.0), sample(0, 600.0)])])


def test_nonpositive_sample_rejected():
    with pytest.raises(ValidationError):
        ProfileSet([TravelTimeProfile("workplace", 3, [sample(0, -1.0)])])


def test_cadence_gap_is_warning_not_error():
    # workplace leg: 5-minute cadence ok, 7-minute gap warns
    ps = profile_set([sample(0, 600.0), sample(7, 660.0)])
    assert any("cadence" in w for w in ps.warnings)
    # inter-stop leg: 2-minute gap exceeds the 1-minute cadence
    ps2 = profile_set([sample(0, 600.0), sample(2, 660.0)], from_ref=1, to_ref=2)
    assert any("cadence" in w for w in ps2.warnings)
    ps3 = profile_set([sample(0, 600.0), sample(1, 630.0)], from_ref=1, to_ref=2)
    assert ps3.warnings == []


def test_time_translation_consistency():
    """Shifting samples and departure together leaves the leg identical."""
    base = [sample(0, 600.0), sample(2, 660.0), sample(4, 630.0)]
    delta = timedelta(minutes=37, seconds=13)
    shifted = [
        ProfileSample(s.depart + delta, s.duration_s, s.distance_m, s.polyline) for s in base
    ]
    ps = profile_set(base)
    ps_shift = profile_set(shifted)
    for probe_min in (0.0, 0.5, 1.0, 1.7, 2.0, 3.99, 4.0):
        t = T0 + timedelta(minutes=probe_min)
        a = drive_leg(ps, "workplace", 3, t)
        b = drive_leg(ps_shift, "workplace", 3, t + delta)
        assert abs(a.duration_s - b.duration_s) < 1e-9
        assert a.distance_m == b.distance_m
        assert a.polyline == b.polyline
        assert a.extrapolated == b.extrapolated


def test_duration_piecewise_linear_and_continuous():
    ps = profile_set([sample(0, 600.0), sample(2, 660.0), sample(4, 540.0)])
    prev = None
    for step in range(0, 241):
        t = T0 + timedelta(seconds=step)
        leg = drive_leg(ps, "workplace", 3, t)
        if prev is not None:
            assert abs(leg.duration_s - prev) <= 1.0 + 1e-9  # max slope is 1 s/s here
        prev = leg.duration_s
    assert drive_leg(ps, "workplace", 3, T0 + timedelta(minutes=2)).duration_s == 660.0


def test_profiles_json_round_trip(small_dataset):
    text = profiles_json_text(small_dataset.profiles)
    again = load_profiles(io.StringIO(text))
    assert profiles_json_text(again) == text
    key = next(iter(small_dataset.profiles.legs))
    a = small_dataset.profiles.legs[key].samples
    b = again.legs[key].samples
    assert len(a) == len(b)
    assert a[0].depart == b[0].depart
    assert a[0].duration_s == b[0].duration_s
