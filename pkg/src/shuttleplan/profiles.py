"""Departure-time-dependent driving legs between stops.

Live traffic queries are out of scope; instead each ordered stop pair carries
a profile of pre-sampled (departure, duration, distance, polyline) tuples.
Lookups interpolate duration linearly between the bracketing samples and take
distance/polyline from the nearest sample (ties go to the earlier one).
Departures outside the sampled range clamp to the nearest endpoint and are
flagged as extrapolated.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import datetime
from typing import IO, Hashable, Iterable

from .errors import NotFoundError, ValidationError
from .geo import GeoPoint

# Reference epoch for converting naive datetimes to arithmetic seconds.
# Using a fixed naive reference keeps the math timezone-free and exact at
# minute precision.
_EPOCH = datetime(2000, 1, 1)

WORKPLACE_REF = "workplace"

# Paper-style sampling cadence: 5 min for workplace legs, 1 min between stops.
FIRST_LEG_GRANULARITY_S = 300.0
INTER_STOP_GRANULARITY_S = 60.0


def to_seconds(t: datetime) -> float:
    return (t - _EPOCH).total_seconds()


def from_seconds(s: float) -> datetime:
    from datetime import timedelta

    return _EPOCH + timedelta(seconds=s)


@dataclass(frozen=True)
class ProfileSample:
    depart: datetime
    duration_s: float
    distance_m: float
    polyline: tuple[GeoPoint, ...]


@dataclass
class TravelTimeProfile:
    from_ref: Hashable
    to_ref: Hashable
    samples: list[ProfileSample]

    def validate(self) -> list[str]:
        """Hard-fail on ordering/positivity; report cadence gaps as warnings."""
        if not self.samples:
            raise ValidationError(f"profile {self.from_ref}->{self.to_ref} has no samples")
        warnings: list[str] = []
        prev: ProfileSample | None = None
        for s in self.samples:
            if s.duration_s <= 0 or s.distance_m <= 0:
                raise ValidationError(
                    f"profile {self.from_ref}->{self.to_ref}: non-positive sample at {s.depart}"
                )
            if prev is not None and s.depart <= prev.depart:
                raise ValidationError(
                    f"profile {self.from_ref}->{self.to_ref}: samples not strictly sorted"
                )
            prev = s
        limit = (
            FIRST_LEG_GRANULARITY_S if self.from_ref == WORKPLACE_REF else INTER_STOP_GRANULARITY_S
        )
        for a, b in zip(self.samples, self.samples[1:]):
            gap = to_seconds(b.depart) - to_seconds(a.depart)
            if gap > limit + 1e-9:
                warnings.append(
                    f"profile {self.from_ref}->{self.to_ref}: {gap:.0f} s gap at {a.depart} "
                    f"exceeds {limit:.0f} s cadence"
                )
                break
        return warnings


@dataclass(frozen=True)
class DriveLeg:
    """One resolved driving leg of a shuttle route."""

    from_point: GeoPoint
    to_point: GeoPoint
    depart: datetime
    duration_s: float
    distance_m: float
    polyline: tuple[GeoPoint, ...]
    extrapolated: bool = False


class ProfileSet:
    """All known leg profiles, keyed by (from_ref, to_ref)."""

    def __init__(self, profiles: Iterable[TravelTimeProfile] = ()):
        self.legs: dict[tuple[Hashable, Hashable], TravelTimeProfile] = {}
        self.warnings: list[str] = []
        for p in profiles:
            self.add(p)

    def add(self, profile: TravelTimeProfile) -> None:
        self.warnings.extend(profile.validate())
        self.legs[(profile.from_ref, profile.to_ref)] = profile

    def has_leg(self, from_ref: Hashable, to_ref: Hashable) -> bool:
        return (from_ref, to_ref) in self.legs

    def rekeyed(self, mapping: dict[Hashable, Hashable]) -> "ProfileSet":
        """Translate leg references (e.g. spot names -> spot ids)."""
        out = ProfileSet()
        for (a, b), p in self.legs.items():
            ra = mapping.get(a, a)
            rb = mapping.get(b, b)
            out.legs[(ra, rb)] = TravelTimeProfile(ra, rb, p.samples)
        return out


def drive_leg(
    profiles: ProfileSet, from_ref: Hashable, to_ref: Hashable, depart: datetime
) -> DriveLeg:
    """Resolve a driving leg at a departure time from the sampled profile.

    Duration is linearly interpolated between the bracketing samples;
    distance and polyline come from the nearest sample (earlier on ties).
    """
    profile = profiles.legs.get((from_ref, to_ref))
    if profile is None:
        raise NotFoundError(f"no travel-time profile for leg {from_ref}->{to_ref}")
    samples = profile.samples
    t = to_seconds(depart)
    times = [to_seconds(s.depart) for s in samples]

    extrapolated = False
    if t <= times[0]:
        nearest = samples[0]
        duration = nearest.duration_s
        extrapolated = t < times[0]
    elif t >= times[-1]:
        nearest = samples[-1]
        duration = nearest.duration_s
        extrapolated = t > times[-1]
    else:
        # bisect for the bracketing pair
        lo, hi = 0, len(times) - 1
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if times[mid] <= t:
                lo = mid
            else:
                hi = mid
        a, b = samples[lo], samples[hi]
        ta, tb = times[lo], times[hi]
        frac = (t - ta) / (tb - ta)
        duration = a.duration_s + frac * (b.duration_s - a.duration_s)
        # nearest sample; equidistant -> earlier
        nearest = a if (t - ta) <= (tb - t) else b

    return DriveLeg(
        from_point=nearest.polyline[0],
        to_point=nearest.polyline[-1],
        depart=depart,
        duration_s=duration,
        distance_m=nearest.distance_m,
        polyline=nearest.polyline,
        extrapolated=extrapolated,
    )


def load_profiles(source: IO[str]) -> ProfileSet:
    """Read profiles.json: {"legs": [{"from", "to", "samples": [...]}, ...]}."""
    try:
        doc = json.load(source)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"profiles JSON unparsable: {exc}") from None
    if not isinstance(doc, dict) or "legs" not in doc:
        raise ValidationError('profiles JSON must be an object with a "legs" array')
    out = ProfileSet()
    for leg in doc["legs"]:
        samples = [
            ProfileSample(
                depart=datetime.fromisoformat(s["depart"]),
                duration_s=float(s["duration_s"]),
                distance_m=float(s["distance_m"]),
                polyline=tuple(GeoPoint(lat, lon) for lat, lon in s["polyline"]),
            )
            for s in leg["samples"]
        ]
        out.add(TravelTimeProfile(leg["from"], leg["to"], samples))
    return out


def profiles_json_text(profiles: ProfileSet) -> str:
    legs = []
    for (a, b), p in sorted(profiles.legs.items(), key=lambda kv: (str(kv[0][0]), str(kv[0][1]))):
        legs.append(
            {
                "from": a,
                "to": b,
                "samples": [
                    {
                        "depart": s.depart.isoformat(),
                        "duration_s": s.duration_s,
                        "distance_m": s.distance_m,
                        "polyline": [[p_.lat, p_.lon] for p_ in s.polyline],
                    }
                    for s in p.samples
                ],
            }
        )
    return json.dumps({"legs": legs}, sort_keys=True, separators=(",", ":"))


def write_profiles(profiles: ProfileSet, out: IO[str]) -> None:
    out.write(profiles_json_text(profiles))
