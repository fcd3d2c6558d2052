"""Assembles a planning dataset from its on-disk pieces.

Loading order: parse trips (collecting rejects), apply manual calibration
overrides, unify destinations into spots, snap spots onto the walking graph
and precompute the walk matrix, then re-key travel-time profiles from spot
names to spot ids. The walk matrix dominates load time at real scale, so it
is built exactly once here.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ValidationError
from .geo import GeoPoint
from .network import (
    DEFAULT_WALK_SPEED_MPS,
    RoadNetwork,
    WalkGraph,
    WalkMatrix,
    load_network,
)
from .profiles import ProfileSet, WORKPLACE_REF, load_profiles
from .trips import (
    DEFAULT_UNIFY_RADIUS_M,
    DropOffSpot,
    RejectedRow,
    TripRecord,
    apply_overrides,
    load_overrides,
    parse_trips,
    unify_locations,
)

log = logging.getLogger(__name__)


@dataclass
class PlanningData:
    workplace: GeoPoint
    trips: list[TripRecord]
    rejects: list[RejectedRow]
    spots: list[DropOffSpot]
    spot_of_trip: dict[int, int]
    network: RoadNetwork
    walk_graph: WalkGraph
    walk: WalkMatrix
    profiles: ProfileSet
    warnings: list[str] = field(default_factory=list)

    @property
    def spots_by_id(self) -> dict[int, DropOffSpot]:
        return {s.spot_id: s for s in self.spots}


def _peek_workplace(trips_path: Path) -> GeoPoint:
    """Single-origin assumption: the workplace is the first row's origin."""
    with open(trips_path, newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        next(reader, None)
        for row in reader:
            if len(row) >= 5:
                return GeoPoint(float(row[3]), float(row[4]))
    raise ValidationError(f"{trips_path}: no data rows to infer the workplace from")


def load_planning_data(
    trips_path: str | Path,
    nodes_path: str | Path,
    edges_path: str | Path,
    profiles_path: str | Path,
    overrides_path: str | Path | None = None,
    workplace: GeoPoint | None = None,
    unify_radius_m: float = DEFAULT_UNIFY_RADIUS_M,
    walk_speed_mps: float = DEFAULT_WALK_SPEED_MPS,
) -> PlanningData:
    trips_path = Path(trips_path)
    if workplace is None:
        workplace = _peek_workplace(trips_path)

    with open(trips_path, newline="", encoding="utf-8") as f:
        parsed = parse_trips(f, workplace)
    if not parsed.records:
        raise ValidationError(f"{trips_path}: no valid trip records")
    records = parsed.records
    if overrides_path is not None:
        with open(overrides_path, newline="", encoding="utf-8") as f:
            records = apply_overrides(records, load_overrides(f))

    spots, spot_of_trip = unify_locations(records, unify_radius_m)
    log.info("unified %d records into %d drop-off spots", len(records), len(spots))

    with open(nodes_path, newline="", encoding="utf-8") as nf, open(
        edges_path, newline="", encoding="utf-8"
    ) as ef:
        network = load_network(nf, ef)

    walk_graph = WalkGraph(network, spots, walk_speed_mps)
    log.info("building %d x %d walk matrix", len(spots), len(spots))
    walk = walk_graph.matrix()

    with open(profiles_path, encoding="utf-8") as f:
        raw_profiles = load_profiles(f)
    profiles, warnings = _rekey_profiles(raw_profiles, spots)
    warnings = raw_profiles.warnings + warnings

    return PlanningData(
        workplace=workplace,
        trips=records,
        rejects=parsed.rejects,
        spots=spots,
        spot_of_trip=spot_of_trip,
        network=network,
        walk_graph=walk_graph,
        walk=walk,
        profiles=profiles,
        warnings=warnings,
    )


def _rekey_profiles(raw: ProfileSet, spots: list[DropOffSpot]) -> tuple[ProfileSet, list[str]]:
    """Translate profile leg references from spot names to spot ids.

    Ambiguous names are fatal; names matching no spot drop their legs with a
    warning (the crawl may cover stops absent from this trip extract).
    """
    by_name: dict[str, list[int]] = {}
    for s in spots:
        by_name.setdefault(s.name, []).append(s.spot_id)

    warnings: list[str] = []
    out = ProfileSet()
    for (a, b), profile in raw.legs.items():
        refs = []
        ok = True
        for ref in (a, b):
            if ref == WORKPLACE_REF:
                refs.append(WORKPLACE_REF)
                continue
            ids = by_name.get(str(ref), [])
            if len(ids) > 1:
                raise ValidationError(
                    f"profile reference {ref!r} is ambiguous: spots {ids} share that name"
                )
            if not ids:
                warnings.append(f"dropping profile leg {a}->{b}: unknown stop {ref!r}")
                ok = False
                break
            refs.append(ids[0])
        if ok:
            out.legs[(refs[0], refs[1])] = profile
    return out, warnings
