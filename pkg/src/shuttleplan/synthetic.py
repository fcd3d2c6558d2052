"""Synthetic dataset generation with planted structure.

Real overtime reimbursement data and live map crawls are unavailable, so
tests and demos run on generated datasets: a grid road network, drop-off
spots planted along a configurable number of travel directions, trips drawn
from a departure-time peak mixture, and travel-time profiles whose
duration/distance inflate by a piecewise-constant congestion schedule. The
emitted metadata records the ground truth (direction labels, peaks,
congestion factors) so recovery can be scored.

Everything is deterministic for a fixed seed, byte-for-byte across the
serialization helpers.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from datetime import date, datetime, time, timedelta
from decimal import Decimal
from pathlib import Path

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from .errors import ValidationError
from .geo import GeoPoint, destination_point, haversine_m
from .network import RoadEdge, RoadNetwork, write_network_csv
from .profiles import ProfileSample, ProfileSet, TravelTimeProfile, WORKPLACE_REF, profiles_json_text
from .trips import TripRecord, trips_csv_text


@dataclass(frozen=True)
class Peak:
    """One departure-time peak: HH:MM on the service date, mixture weight,
    and the max uniform jitter in whole minutes."""

    at: str
    weight: float
    max_jitter_min: int = 8


@dataclass(frozen=True)
class CongestionStep:
    """Multiplicative factors applying to departures at/after `start` until
    the next step (piecewise constant; clamped before the first step)."""

    start: str
    duration_factor: float = 1.0
    distance_factor: float = 1.0


@dataclass
class SyntheticSpec:
    directions: int = 4
    angular_spread_deg: float = 10.0
    spots_per_direction: int = 3
    orders_per_spot: int = 20
    peaks: list[Peak] = field(default_factory=lambda: [Peak("21:30", 0.6), Peak("21:55", 0.4)])
    congestion: list[CongestionStep] = field(default_factory=lambda: [CongestionStep("00:00")])
    service_date: date = date(2019, 6, 12)
    workplace: GeoPoint = field(default_factory=lambda: GeoPoint(22.54, 114.05))
    grid_rows: int = 49
    grid_cols: int = 49
    grid_spacing_m: float = 250.0
    radius_min_m: float = 3000.0
    radius_max_m: float = 5200.0
    start_bearing_deg: float = 20.0
    dest_jitter_m: float = 0.0
    min_spot_separation_m: float = 600.0
    drive_speed_mps: float = 30.0 / 3.6
    profile_start: str = "21:15"
    profile_end: str = "23:30"
    first_leg_interval_min: int = 5
    inter_stop_interval_min: int = 1
    all_pairs: bool = False
    fare_base: Decimal = Decimal("12.00")
    fare_per_km: Decimal = Decimal("2.60")


@dataclass
class SyntheticMetadata:
    direction_of_spot: dict[str, int]
    spot_locations: dict[str, tuple[float, float]]
    planted_peaks: list[dict]
    congestion: list[dict]
    workplace: tuple[float, float]
    trip_direction_labels: list[int]

    def to_json(self) -> str:
        return json.dumps(
            {
                "direction_of_spot": self.direction_of_spot,
                "spot_locations": self.spot_locations,
                "planted_peaks": self.planted_peaks,
                "congestion": self.congestion,
                "workplace": list(self.workplace),
                "trip_direction_labels": self.trip_direction_labels,
            },
            sort_keys=True,
            separators=(",", ":"),
        )


@dataclass
class SyntheticDataset:
    trips: list[TripRecord]
    network: RoadNetwork
    profiles: ProfileSet
    metadata: SyntheticMetadata

    def write(self, out_dir: str | Path) -> None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "trips.csv").write_text(trips_csv_text(self.trips), encoding="utf-8")
        with open(out / "nodes.csv", "w", encoding="utf-8") as nf, open(
            out / "edges.csv", "w", encoding="utf-8"
        ) as ef:
            write_network_csv(self.network, nf, ef)
        (out / "profiles.json").write_text(profiles_json_text(self.profiles), encoding="utf-8")
        (out / "metadata.json").write_text(self.metadata.to_json(), encoding="utf-8")


def _parse_hhmm(s: str) -> time:
    h, m = s.split(":")
    return time(int(h), int(m))


def generate_synthetic(spec: SyntheticSpec, seed: int) -> SyntheticDataset:
    """Generate (trips, network, profiles) with planted ground truth."""
    if spec.directions < 1:
        raise ValidationError("need at least one planted direction")
    if not spec.peaks:
        raise ValidationError("departure peak mixture is empty")
    if spec.spots_per_direction < 1 or spec.orders_per_spot < 1:
        raise ValidationError("need at least one spot per direction and one order per spot")
    half_extent = min(spec.grid_rows, spec.grid_cols) // 2 * spec.grid_spacing_m
    if spec.radius_max_m + spec.grid_spacing_m > half_extent:
        raise ValidationError(
            f"grid half-extent {half_extent:.0f} m cannot contain spots out to "
            f"{spec.radius_max_m:.0f} m"
        )

    rng = np.random.default_rng(seed)
    network, node_points, node_index = _build_grid(spec)

    spot_nodes, spot_names, direction_of_spot = _plant_spots(spec, rng, node_points)
    spot_locations = {name: node_points[node] for name, node in zip(spot_names, spot_nodes)}

    trips, trip_labels = _plant_trips(spec, rng, spot_names, spot_locations, direction_of_spot)
    profiles = _build_profiles(spec, network, node_points, node_index, spot_nodes, spot_names)

    metadata = SyntheticMetadata(
        direction_of_spot={n: direction_of_spot[n] for n in spot_names},
        spot_locations={n: (p.lat, p.lon) for n, p in spot_locations.items()},
        planted_peaks=[
            {"at": p.at, "weight": p.weight, "max_jitter_min": p.max_jitter_min}
            for p in spec.peaks
        ],
        congestion=[
            {
                "start": c.start,
                "duration_factor": c.duration_factor,
                "distance_factor": c.distance_factor,
            }
            for c in spec.congestion
        ],
        workplace=(spec.workplace.lat, spec.workplace.lon),
        trip_direction_labels=trip_labels,
    )
    return SyntheticDataset(trips, network, profiles, metadata)


def _build_grid(spec: SyntheticSpec):
    """Rectangular walk+drive grid centered on the workplace."""
    lat0, lon0 = spec.workplace.lat, spec.workplace.lon
    dlat = spec.grid_spacing_m / 111_195.0
    dlon = spec.grid_spacing_m / (111_195.0 * math.cos(math.radians(lat0)))
    r0, c0 = spec.grid_rows // 2, spec.grid_cols // 2

    node_points: dict[str, GeoPoint] = {}
    for r in range(spec.grid_rows):
        for c in range(spec.grid_cols):
            node_points[f"n{r}x{c}"] = GeoPoint(lat0 + (r - r0) * dlat, lon0 + (c - c0) * dlon)
    edges: list[RoadEdge] = []
    modes = frozenset({"walk", "drive"})
    for r in range(spec.grid_rows):
        for c in range(spec.grid_cols):
            a = f"n{r}x{c}"
            for rr, cc in ((r + 1, c), (r, c + 1)):
                if rr >= spec.grid_rows or cc >= spec.grid_cols:
                    continue
                b = f"n{rr}x{cc}"
                length = haversine_m(node_points[a], node_points[b])
                edges.append(RoadEdge(a, b, length, modes))
                edges.append(RoadEdge(b, a, length, modes))
    network = RoadNetwork(node_points, edges)
    node_index = {n: i for i, n in enumerate(sorted(node_points))}
    return network, node_points, node_index


def _plant_spots(spec: SyntheticSpec, rng: np.random.Generator, node_points: dict[str, GeoPoint]):
    """Place spots on grid nodes along evenly spaced direction bearings."""
    lat0 = spec.workplace.lat
    dlat = spec.grid_spacing_m / 111_195.0
    dlon = spec.grid_spacing_m / (111_195.0 * math.cos(math.radians(lat0)))
    r0, c0 = spec.grid_rows // 2, spec.grid_cols // 2

    def node_for(p: GeoPoint) -> str:
        r = round(r0 + (p.lat - lat0) / dlat)
        c = round(c0 + (p.lon - spec.workplace.lon) / dlon)
        r = min(max(r, 0), spec.grid_rows - 1)
        c = min(max(c, 0), spec.grid_cols - 1)
        return f"n{r}x{c}"

    spot_nodes: list[str] = []
    spot_names: list[str] = []
    direction_of_spot: dict[str, int] = {}
    placed: list[GeoPoint] = []
    idx = 0
    for d in range(spec.directions):
        center = (spec.start_bearing_deg + 360.0 * d / spec.directions) % 360.0
        for _ in range(spec.spots_per_direction):
            node = None
            for _attempt in range(200):
                bearing = center + rng.uniform(-spec.angular_spread_deg / 2, spec.angular_spread_deg / 2)
                radius = rng.uniform(spec.radius_min_m, spec.radius_max_m)
                candidate_node = node_for(destination_point(spec.workplace, bearing % 360.0, radius))
                p = node_points[candidate_node]
                if candidate_node in spot_nodes:
                    continue
                if all(haversine_m(p, q) >= spec.min_spot_separation_m for q in placed):
                    node = candidate_node
                    break
            if node is None:
                raise ValidationError(
                    "could not place spots with the requested separation; widen the radius "
                    "band or reduce spot count"
                )
            name = f"spot-{idx:03d}"
            idx += 1
            spot_nodes.append(node)
            spot_names.append(name)
            direction_of_spot[name] = d
            placed.append(node_points[node])
    return spot_nodes, spot_names, direction_of_spot


def _plant_trips(
    spec: SyntheticSpec,
    rng: np.random.Generator,
    spot_names: list[str],
    spot_locations: dict[str, GeoPoint],
    direction_of_spot: dict[str, int],
):
    weights = np.array([p.weight for p in spec.peaks], dtype=float)
    if weights.sum() <= 0:
        raise ValidationError("peak weights must sum to a positive value")
    weights = weights / weights.sum()
    peak_times = [
        datetime.combine(spec.service_date, _parse_hhmm(p.at)) for p in spec.peaks
    ]

    trips: list[TripRecord] = []
    labels: list[int] = []
    emp = 0
    for name in spot_names:
        loc = spot_locations[name]
        for _ in range(spec.orders_per_spot):
            pi = int(rng.choice(len(spec.peaks), p=weights))
            jitter = int(rng.integers(-spec.peaks[pi].max_jitter_min, spec.peaks[pi].max_jitter_min + 1))
            departure = peak_times[pi] + timedelta(minutes=jitter)
            dist_m = haversine_m(spec.workplace, loc)
            ride_min = max(1, round(dist_m / spec.drive_speed_mps / 60.0))
            arrival = departure + timedelta(minutes=ride_min)
            if spec.dest_jitter_m > 0:
                dest = destination_point(
                    loc, float(rng.uniform(0, 360)), float(rng.uniform(0, spec.dest_jitter_m))
                )
            else:
                dest = loc
            fare = (spec.fare_base + spec.fare_per_km * Decimal(f"{dist_m / 1000.0:.3f}")).quantize(
                Decimal("0.01")
            )
            trips.append(
                TripRecord(
                    employee_id=f"emp-{emp:05d}",
                    departure_time=departure,
                    arrival_time=arrival,
                    origin=spec.workplace,
                    destination_raw=name,
                    destination=dest,
                    payment=fare,
                )
            )
            labels.append(direction_of_spot[name])
            emp += 1
    return trips, labels


def _congestion_factors(spec: SyntheticSpec, at: datetime) -> tuple[float, float]:
    steps = sorted(spec.congestion, key=lambda s: _parse_hhmm(s.start))
    current = steps[0]
    t = at.time()
    for s in steps:
        if _parse_hhmm(s.start) <= t:
            current = s
        else:
            break
    return current.duration_factor, current.distance_factor


def _build_profiles(
    spec: SyntheticSpec,
    network: RoadNetwork,
    node_points: dict[str, GeoPoint],
    node_index: dict[str, int],
    spot_nodes: list[str],
    spot_names: list[str],
) -> ProfileSet:
    """Grid shortest driving paths, inflated by the congestion schedule."""
    n = len(node_index)
    rows, cols, vals = [], [], []
    for e in network.edges:
        if "drive" in e.modes:
            rows.append(node_index[e.from_node])
            cols.append(node_index[e.to_node])
            vals.append(e.length_m)
    graph = csr_matrix((vals, (rows, cols)), shape=(n, n))
    node_ids = sorted(node_index)

    workplace_node = min(
        node_ids, key=lambda nid: haversine_m(node_points[nid], spec.workplace)
    )
    sources = [workplace_node] + spot_nodes
    src_idx = [node_index[s] for s in sources]
    dist, pred = dijkstra(graph, directed=True, indices=src_idx, return_predecessors=True)

    def path_points(si: int, dst_node: str) -> list[GeoPoint]:
        target = node_index[dst_node]
        chain = [target]
        while chain[-1] != src_idx[si]:
            p = pred[si, chain[-1]]
            if p < 0:
                raise ValidationError("grid should be connected")
            chain.append(int(p))
        chain.reverse()
        return [node_points[node_ids[i]] for i in chain]

    day = spec.service_date
    t_start = datetime.combine(day, _parse_hhmm(spec.profile_start))
    t_end = datetime.combine(day, _parse_hhmm(spec.profile_end))

    def make_profile(si: int, from_ref, to_node: str, to_ref, interval_min: int) -> TravelTimeProfile:
        base_dist = float(dist[si, node_index[to_node]])
        base_dura = base_dist / spec.drive_speed_mps
        poly = tuple(path_points(si, to_node))
        samples = []
        t = t_start
        while t <= t_end:
            df, xf = _congestion_factors(spec, t)
            samples.append(
                ProfileSample(
                    depart=t,
                    duration_s=base_dura * df,
                    distance_m=base_dist * xf,
                    polyline=poly,
                )
            )
            t += timedelta(minutes=interval_min)
        return TravelTimeProfile(from_ref, to_ref, samples)

    out = ProfileSet()
    for i, name in enumerate(spot_names):
        out.add(make_profile(0, WORKPLACE_REF, spot_nodes[i], name, spec.first_leg_interval_min))
    for i, a in enumerate(spot_names):
        for j, b in enumerate(spot_names):
            if i == j:
                continue
            if not spec.all_pairs:
                # inter-stop legs only within the same planted direction
                if i // spec.spots_per_direction != j // spec.spots_per_direction:
                    continue
            out.add(
                make_profile(1 + i, a, spot_nodes[j], b, spec.inter_stop_interval_min)
            )
    return out
