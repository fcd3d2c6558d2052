"""Trip-record ingestion: CSV parsing with a rejects report, calibration
overrides, and unification of near-duplicate destinations into drop-off spots.

Destinations that name the same residential complex often differ by a few
dozen meters (building numbers, entrances). Unification groups them by
single-linkage chaining at a configurable great-circle radius and replaces
each group with one weighted spot. Rows that violate the record invariants
are never dropped silently; they land in the rejects report with the line
number and reason.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from datetime import datetime
from decimal import Decimal, InvalidOperation
from typing import Iterable, TextIO

from .errors import ValidationError
from .geo import GeoPoint, haversine_m

TRIPS_HEADER = [
    "employee_id",
    "departure_time",
    "arrival_time",
    "origin_lat",
    "origin_lon",
    "dest_name",
    "dest_lat",
    "dest_lon",
    "payment",
]

# Origins further than this from the declared workplace violate the
# single-origin assumption.
ORIGIN_TOLERANCE_M = 1.0

DEFAULT_UNIFY_RADIUS_M = 150.0


@dataclass(frozen=True)
class TripRecord:
    """One reimbursed car-hailing trip from the workplace to a home destination."""

    employee_id: str
    departure_time: datetime
    arrival_time: datetime
    origin: GeoPoint
    destination_raw: str
    destination: GeoPoint
    payment: Decimal


@dataclass(frozen=True)
class RejectedRow:
    line_no: int
    reason: str


@dataclass
class ParseResult:
    records: list[TripRecord]
    rejects: list[RejectedRow] = field(default_factory=list)


@dataclass(frozen=True)
class DropOffSpot:
    """A unified destination: the demand-weighted centroid of merged trips."""

    spot_id: int
    location: GeoPoint
    name: str
    order_count: int


def parse_trips(source: TextIO | Iterable[str], workplace: GeoPoint) -> ParseResult:
    """Parse the trips CSV, validating every row against the record invariants.

    A malformed header is fatal; bad rows become reject entries. Records come
    back in file order.
    """
    reader = csv.reader(source)
    try:
        header = next(reader)
    except StopIteration:
        raise ValidationError("trips CSV is empty (missing header)") from None
    if header != TRIPS_HEADER:
        raise ValidationError(
            f"malformed trips header: expected {','.join(TRIPS_HEADER)}, got {','.join(header)}"
        )

    records: list[TripRecord] = []
    rejects: list[RejectedRow] = []
    for line_no, row in enumerate(reader, start=2):
        if not row:
            continue
        reason = None
        record = None
        try:
            record = _parse_row(row, workplace)
        except _RowError as exc:
            reason = str(exc)
        if record is not None:
            records.append(record)
        else:
            rejects.append(RejectedRow(line_no, reason or "unparsable row"))
    return ParseResult(records, rejects)


class _RowError(Exception):
    pass


def _parse_row(row: list[str], workplace: GeoPoint) -> TripRecord:
    if len(row) != len(TRIPS_HEADER):
        raise _RowError(f"expected {len(TRIPS_HEADER)} fields, got {len(row)}")
    (emp, dep_s, arr_s, olat_s, olon_s, dest_name, dlat_s, dlon_s, pay_s) = row
    try:
        departure = datetime.fromisoformat(dep_s)
        arrival = datetime.fromisoformat(arr_s)
    except ValueError as exc:
        raise _RowError(f"bad timestamp: {exc}") from None
    if arrival < departure:
        raise _RowError("arrival_time < departure_time")
    try:
        olat, olon = float(olat_s), float(olon_s)
        dlat, dlon = float(dlat_s), float(dlon_s)
    except ValueError:
        raise _RowError("non-numeric coordinate") from None
    try:
        origin = GeoPoint(olat, olon)
    except ValueError as exc:
        raise _RowError(f"origin: {exc}") from None
    try:
        destination = GeoPoint(dlat, dlon)
    except ValueError as exc:
        raise _RowError(f"destination: {exc}") from None
    if haversine_m(origin, workplace) > ORIGIN_TOLERANCE_M:
        raise _RowError("origin differs from dataset workplace")
    try:
        payment = Decimal(pay_s)
    except InvalidOperation:
        raise _RowError(f"unparsable payment {pay_s!r}") from None
    if payment < 0:
        raise _RowError("negative payment")
    return TripRecord(emp, departure, arrival, origin, dest_name, destination, payment)


def write_trips_csv(records: Iterable[TripRecord], out: TextIO) -> None:
    """Serialize records to the canonical CSV schema (parse round-trips exactly)."""
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(TRIPS_HEADER)
    for r in records:
        writer.writerow(
            [
                r.employee_id,
                r.departure_time.isoformat(),
                r.arrival_time.isoformat(),
                repr(r.origin.lat),
                repr(r.origin.lon),
                r.destination_raw,
                repr(r.destination.lat),
                repr(r.destination.lon),
                str(r.payment),
            ]
        )


def trips_csv_text(records: Iterable[TripRecord]) -> str:
    buf = io.StringIO()
    write_trips_csv(records, buf)
    return buf.getvalue()


def load_overrides(source: TextIO | Iterable[str]) -> dict[str, GeoPoint]:
    """Read the manual-calibration file mapping raw destination label to a point."""
    reader = csv.reader(source)
    header = next(reader, None)
    if header != ["label", "lat", "lon"]:
        raise ValidationError("malformed overrides header: expected label,lat,lon")
    out: dict[str, GeoPoint] = {}
    for line_no, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != 3:
            raise ValidationError(f"overrides line {line_no}: expected 3 fields")
        try:
            out[row[0]] = GeoPoint(float(row[1]), float(row[2]))
        except ValueError as exc:
            raise ValidationError(f"overrides line {line_no}: {exc}") from None
    return out


def apply_overrides(records: list[TripRecord], overrides: dict[str, GeoPoint]) -> list[TripRecord]:
    """Replace destinations whose raw label appears in the calibration map."""
    if not overrides:
        return list(records)
    out = []
    for r in records:
        loc = overrides.get(r.destination_raw)
        if loc is None:
            out.append(r)
        else:
            out.append(
                TripRecord(
                    r.employee_id,
                    r.departure_time,
                    r.arrival_time,
                    r.origin,
                    r.destination_raw,
                    loc,
                    r.payment,
                )
            )
    return out


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, i: int) -> int:
        while self.parent[i] != i:
            self.parent[i] = self.parent[self.parent[i]]
            i = self.parent[i]
        return i

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if rb < ra:
            ra, rb = rb, ra
        self.parent[rb] = ra
        return True


def _grid_pairs(points: list[GeoPoint], radius_m: float):
    """Yield candidate index pairs whose great-circle distance can be <= radius.

    Buckets points on a lat/lon grid sized to the radius so the pairwise pass
    stays near-linear for city-scale datasets.
    """
    if not points:
        return
    lat0 = math.radians(sum(p.lat for p in points) / len(points))
    dlat = math.degrees(radius_m / 6_371_000.0)
    dlon = dlat / max(0.01, math.cos(lat0))
    buckets: dict[tuple[int, int], list[int]] = {}
    for i, p in enumerate(points):
        key = (int(math.floor(p.lat / dlat)), int(math.floor(p.lon / dlon)))
        buckets.setdefault(key, []).append(i)
    for (bi, bj), members in buckets.items():
        for di in (-1, 0, 1):
            for dj in (-1, 0, 1):
                other = buckets.get((bi + di, bj + dj))
                if other is None:
                    continue
                for i in members:
                    for j in other:
                        if i < j:
                            yield i, j


def unify_points(
    points: list[GeoPoint],
    weights: list[int],
    labels: list[str],
    radius_m: float = DEFAULT_UNIFY_RADIUS_M,
) -> tuple[list[DropOffSpot], list[int]]:
    """Single-linkage unification of weighted points into drop-off spots.

    Two points join the same spot when a chain of pairwise great-circle
    distances <= radius_m connects them. Spot location is the weight-averaged
    centroid; after the initial pass, groups whose centroids still sit within
    radius_m are merged until no such pair remains, so emitted spots are
    always pairwise further apart than the radius. Returns the spots plus the
    input-index -> spot_id assignment.
    """
    if not points:
        raise ValidationError("unify requires at least one point")
    n = len(points)
    uf = _UnionFind(n)
    for i, j in _grid_pairs(points, radius_m):
        if haversine_m(points[i], points[j]) <= radius_m:
            uf.union(i, j)

    def groups() -> dict[int, list[int]]:
        g: dict[int, list[int]] = {}
        for i in range(n):
            g.setdefault(uf.find(i), []).append(i)
        return g

    def centroid(members: list[int]) -> GeoPoint:
        w = sum(weights[i] for i in members)
        lat = sum(points[i].lat * weights[i] for i in members) / w
        lon = sum(points[i].lon * weights[i] for i in members) / w
        return GeoPoint(lat, lon)

    # Chained groups can end up with centroids closer than the radius even
    # though no cross pair was; collapse those too so the spot set itself
    # honors the spacing invariant (this also makes unification idempotent).
    while True:
        g = groups()
        roots = sorted(g)
        cents = [centroid(g[r]) for r in roots]
        merged = False
        for a, b in _grid_pairs(cents, radius_m):
            if haversine_m(cents[a], cents[b]) <= radius_m:
                if uf.union(roots[a], roots[b]):
                    merged = True
        if not merged:
            break

    g = groups()
    # dense ids in order of first appearance in the input
    ordered_roots = sorted(g, key=lambda r: min(g[r]))
    spots: list[DropOffSpot] = []
    assignment = [0] * n
    for spot_id, root in enumerate(ordered_roots):
        members = g[root]
        name_counts: dict[str, int] = {}
        for i in members:
            name_counts[labels[i]] = name_counts.get(labels[i], 0) + weights[i]
        top = max(name_counts.values())
        # tie on count -> lexicographically smallest label
        name = min(k for k, v in name_counts.items() if v == top)
        spots.append(
            DropOffSpot(
                spot_id=spot_id,
                location=centroid(members),
                name=name,
                order_count=sum(weights[i] for i in members),
            )
        )
        for i in members:
            assignment[i] = spot_id
    return spots, assignment


def unify_locations(
    records: list[TripRecord], radius_m: float = DEFAULT_UNIFY_RADIUS_M
) -> tuple[list[DropOffSpot], dict[int, int]]:
    """Unify trip destinations; each record carries weight 1.

    Returns spots plus the record-index -> spot_id map.
    """
    if not records:
        raise ValidationError("unify_locations requires at least one record")
    points = [r.destination for r in records]
    labels = [r.destination_raw for r in records]
    spots, assignment = unify_points(points, [1] * len(records), labels, radius_m)
    return spots, {i: s for i, s in enumerate(assignment)}
