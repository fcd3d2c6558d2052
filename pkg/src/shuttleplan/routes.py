"""Route stringing, timetables, route-level metrics, and comparisons.

A route serves one travel direction: one chosen stop per regional cluster,
visited in ascending driving distance from the workplace, with legs resolved
from the departure-time profiles. Route metrics feed the radar comparison
(up to three candidates); diff_routes overlays a reference route (e.g. the
daytime one) against ours on identical demand.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from datetime import datetime, timedelta

from .errors import ValidationError
from .geo import GeoPoint, bearing_deg, haversine_m
from .network import WalkMatrix
from .profiles import WORKPLACE_REF, DriveLeg, ProfileSet, drive_leg
from .regions import RegionalCluster
from .stops import recommend_stop, stop_metrics
from .trips import DropOffSpot, TripRecord

DEFAULT_DWELL_S = 30.0
DEFAULT_NUMS_WINDOW_MIN = 10.0
ZIGZAG_MAX_TURN_DEG = 90.0
LEG_REGRESSION_TOLERANCE_M = 200.0
REFERENCE_SNAP_M = 300.0

RADAR_AXES = (
    "driving_dura",
    "driving_dist",
    "walk_reach800",
    "walk_avg_dura",
    "walk_avg_dist",
    "nums",
)
COST_AXES = frozenset({"driving_dura", "driving_dist", "walk_avg_dura", "walk_avg_dist"})


@dataclass
class ShuttleRoute:
    direction_id: int
    stops: list[tuple[int, int]]  # (region_id, spot_id) in visiting order
    departure_time: datetime
    legs: list[DriveLeg]


@dataclass(frozen=True)
class TimetableEntry:
    region_id: int
    spot_id: int
    arrival: datetime
    cumulative_distance_m: float


@dataclass
class Timetable:
    entries: list[TimetableEntry]


@dataclass
class RouteMetrics:
    driving_dura: float
    driving_dist: float
    walk_reach800: float
    walk_avg_dura: float
    walk_avg_dist: float
    nums: int

    def axis(self, key: str) -> float:
        return float(getattr(self, key))


def string_route(
    direction_id: int,
    regions: list[RegionalCluster],
    overrides: dict[int, int],
    departure_time: datetime,
    profiles: ProfileSet,
    walk: WalkMatrix,
    workplace: GeoPoint,
    spots: dict[int, DropOffSpot],
) -> ShuttleRoute:
    """String one stop per region into a route, nearest-to-workplace first.

    Stop choice is the override if present, else the avg_dist recommendation.
    Ordering uses profile driving distance at the departure time when the
    workplace leg exists for every stop, else great-circle distance. Legs are
    chained with each leg departing at the previous arrival.
    """
    if not regions:
        raise ValidationError(f"direction {direction_id} has no regions")
    chosen: list[tuple[int, int]] = []
    for region in regions:
        sid = overrides.get(region.region_id)
        if sid is not None:
            if sid not in region.member_spot_ids:
                raise ValidationError(
                    f"override spot {sid} is not a member of region {region.region_id}"
                )
        else:
            sid = recommend_stop(region, walk)
        chosen.append((region.region_id, sid))

    all_profiled = all(profiles.has_leg(WORKPLACE_REF, sid) for _, sid in chosen)
    if all_profiled:
        def sort_key(rs: tuple[int, int]) -> tuple[float, int]:
            leg = drive_leg(profiles, WORKPLACE_REF, rs[1], departure_time)
            return (leg.distance_m, rs[1])
    else:
        def sort_key(rs: tuple[int, int]) -> tuple[float, int]:
            return (haversine_m(workplace, spots[rs[1]].location), rs[1])

    chosen.sort(key=sort_key)

    legs: list[DriveLeg] = []
    cursor = departure_time
    prev_ref: object = WORKPLACE_REF
    for _, sid in chosen:
        leg = drive_leg(profiles, prev_ref, sid, cursor)
        legs.append(leg)
        cursor = cursor + timedelta(seconds=leg.duration_s)
        prev_ref = sid
    return ShuttleRoute(direction_id, chosen, departure_time, legs)


def timetable(route: ShuttleRoute, dwell_s: float = DEFAULT_DWELL_S) -> Timetable:
    """Arrival time and cumulative distance per stop; dwell applies after each
    arrival except the last."""
    entries: list[TimetableEntry] = []
    t = route.departure_time
    cum = 0.0
    for i, ((region_id, spot_id), leg) in enumerate(zip(route.stops, route.legs)):
        if i > 0:
            t = t + timedelta(seconds=dwell_s)
        t = t + timedelta(seconds=leg.duration_s)
        cum += leg.distance_m
        entries.append(TimetableEntry(region_id, spot_id, t, cum))
    return Timetable(entries)


def route_metrics(
    route: ShuttleRoute,
    trips: list[TripRecord],
    walk: WalkMatrix,
    regions: list[RegionalCluster],
    window_min: float = DEFAULT_NUMS_WINDOW_MIN,
    dwell_s: float = DEFAULT_DWELL_S,
) -> RouteMetrics:
    """Radar metrics for one route.

    Walk metrics aggregate each region's chosen-stop metrics weighted by the
    region's order total; nums counts trips departing within +-window_min of
    the route departure.
    """
    driving_dura = math.fsum(leg.duration_s for leg in route.legs)
    if len(route.stops) > 1:
        driving_dura += dwell_s * (len(route.stops) - 1)
    driving_dist = math.fsum(leg.distance_m for leg in route.legs)

    by_region = {r.region_id: r for r in regions}
    w_total = 0
    dist_sum = dura_sum = reach_sum = 0.0
    for region_id, spot_id in route.stops:
        region = by_region[region_id]
        m = stop_metrics(spot_id, region, walk)
        w = m.total_weight
        w_total += w
        dist_sum += w * m.avg_dist
        dura_sum += w * m.avg_dura
        reach_sum += w * m.reach[800.0]
    if w_total == 0:
        raise ValidationError("route covers no demand")

    return RouteMetrics(
        driving_dura=driving_dura,
        driving_dist=driving_dist,
        walk_reach800=reach_sum / w_total,
        walk_avg_dura=dura_sum / w_total,
        walk_avg_dist=dist_sum / w_total,
        nums=count_departures_near(trips, route.departure_time, window_min),
    )


def count_departures_near(trips: list[TripRecord], depart: datetime, window_min: float) -> int:
    lo = depart - timedelta(minutes=window_min)
    hi = depart + timedelta(minutes=window_min)
    return sum(1 for t in trips if lo <= t.departure_time <= hi)


def departure_histogram(
    trips: list[TripRecord], bin_min: int = 5
) -> list[tuple[datetime, int]]:
    """Departure counts in bin_min-minute bins aligned to midnight, zero-filled
    across the observed range."""
    if bin_min < 1:
        raise ValidationError("bin_min must be >= 1")
    if not trips:
        return []
    width = timedelta(minutes=bin_min)

    def floor_to_bin(t: datetime) -> datetime:
        midnight = t.replace(hour=0, minute=0, second=0, microsecond=0)
        offset = (t - midnight) // width
        return midnight + offset * width

    counts: dict[datetime, int] = {}
    for t in trips:
        b = floor_to_bin(t.departure_time)
        counts[b] = counts.get(b, 0) + 1
    lo = min(counts)
    hi = max(counts)
    out: list[tuple[datetime, int]] = []
    b = lo
    while b <= hi:
        out.append((b, counts.get(b, 0)))
        b += width
    return out


def check_criteria(route: ShuttleRoute, workplace: GeoPoint) -> list[str]:
    """Advisory route-quality warnings: move-forward, zigzag, leg regression."""
    warnings: list[str] = []
    dists = [haversine_m(workplace, leg.to_point) for leg in route.legs]
    for i in range(1, len(dists)):
        if dists[i] <= dists[i - 1]:
            a = route.stops[i - 1][1]
            b = route.stops[i][1]
            warnings.append(
                f"move-forward: stop {b} ({dists[i]:.0f} m from workplace) is not farther "
                f"than stop {a} ({dists[i - 1]:.0f} m)"
            )
    for i in range(1, len(route.legs)):
        prev, cur = route.legs[i - 1], route.legs[i]
        if (
            haversine_m(prev.from_point, prev.to_point) < 1.0
            or haversine_m(cur.from_point, cur.to_point) < 1.0
        ):
            continue
        b1 = bearing_deg(prev.from_point, prev.to_point)
        b2 = bearing_deg(cur.from_point, cur.to_point)
        turn = abs((b2 - b1 + 180.0) % 360.0 - 180.0)
        if turn > ZIGZAG_MAX_TURN_DEG:
            warnings.append(
                f"zigzag: {turn:.0f} degree turn between legs {i} and {i + 1} exceeds "
                f"{ZIGZAG_MAX_TURN_DEG:.0f}"
            )
    for i, leg in enumerate(route.legs):
        regress = haversine_m(workplace, leg.from_point) - haversine_m(workplace, leg.to_point)
        if regress > LEG_REGRESSION_TOLERANCE_M:
            warnings.append(
                f"leg-regression: leg {i + 1} ends {regress:.0f} m closer to the workplace "
                f"than it starts"
            )
    return warnings


@dataclass
class RadarEntry:
    label: str
    metrics: RouteMetrics
    normalized: dict[str, float]


@dataclass
class RadarPayload:
    entries: list[RadarEntry]
    axes: list[dict]


def compare_routes(
    labeled_routes: list[tuple[str, ShuttleRoute]],
    trips: list[TripRecord],
    walk: WalkMatrix,
    regions: list[RegionalCluster],
    window_min: float = DEFAULT_NUMS_WINDOW_MIN,
    dwell_s: float = DEFAULT_DWELL_S,
) -> RadarPayload:
    """Min-max normalized radar payload for up to three routes.

    Degenerate axes (all candidates equal, or a single route) normalize to
    1.0; axis metadata flags which axes are cost-like so the UI can orient.
    """
    if not 1 <= len(labeled_routes) <= 3:
        raise ValidationError("compare_routes takes between 1 and 3 routes")
    metrics = [
        route_metrics(r, trips, walk, regions, window_min, dwell_s) for _, r in labeled_routes
    ]
    normalized: list[dict[str, float]] = [{} for _ in metrics]
    for axis in RADAR_AXES:
        vals = [m.axis(axis) for m in metrics]
        lo, hi = min(vals), max(vals)
        for i, v in enumerate(vals):
            normalized[i][axis] = 1.0 if hi == lo else (v - lo) / (hi - lo)
    entries = [
        RadarEntry(label, m, norm)
        for (label, _), m, norm in zip(labeled_routes, metrics, normalized)
    ]
    axes = [{"key": a, "lower_is_better": a in COST_AXES} for a in RADAR_AXES]
    return RadarPayload(entries, axes)


@dataclass
class SpotDelta:
    spot_id: int
    ours_m: float
    reference_m: float
    delta_m: float


@dataclass
class RouteDiff:
    ours: RouteMetrics
    reference: RouteMetrics
    spot_deltas: list[SpotDelta]
    ours_polyline: list[GeoPoint]
    reference_polyline: list[GeoPoint]
    unmatched_reference_stops: list[GeoPoint]


def diff_routes(
    ours: ShuttleRoute,
    reference_stops: list[GeoPoint],
    reference_departure: datetime,
    trips: list[TripRecord],
    walk: WalkMatrix,
    spots: dict[int, DropOffSpot],
    direction_spot_ids: list[int],
    profiles: ProfileSet,
    workplace: GeoPoint,
    window_min: float = DEFAULT_NUMS_WINDOW_MIN,
    dwell_s: float = DEFAULT_DWELL_S,
) -> RouteDiff:
    """Overlay a reference route (given as raw stop coordinates) against ours.

    Reference stops snap to the nearest known spot within 300 m; unmatched
    stops stay as zero-demand free points (they drive legs but cover no
    walkers). Both routes get nearest-stop walk metrics over the same spot
    set so the comparison is apples-to-apples.
    """
    snapped: list[int] = []
    unmatched: list[GeoPoint] = []
    for p in reference_stops:
        best_sid, best_d = None, math.inf
        for sid in direction_spot_ids:
            d = haversine_m(p, spots[sid].location)
            if d < best_d:
                best_sid, best_d = sid, d
        if best_sid is not None and best_d <= REFERENCE_SNAP_M:
            snapped.append(best_sid)
        else:
            unmatched.append(p)

    ref_points = [spots[s].location for s in snapped] + unmatched
    ref_refs: list[int | None] = [s for s in snapped] + [None] * len(unmatched)
    ref_legs = _chain_legs(ref_points, ref_refs, reference_departure, profiles, workplace)

    ours_stop_ids = [sid for _, sid in ours.stops]
    ours_m = _nearest_stop_metrics(
        ours_stop_ids, ours, trips, walk, direction_spot_ids, window_min, dwell_s
    )
    ref_route = ShuttleRoute(ours.direction_id, [(-1, s) for s in snapped], reference_departure, ref_legs)
    ref_m = _nearest_stop_metrics(
        snapped, ref_route, trips, walk, direction_spot_ids, window_min, dwell_s
    )

    deltas: list[SpotDelta] = []
    for sid in direction_spot_ids:
        d_ours = _min_walk(walk, ours_stop_ids, sid)
        d_ref = _min_walk(walk, snapped, sid)
        deltas.append(SpotDelta(sid, d_ours, d_ref, d_ours - d_ref))

    return RouteDiff(
        ours=ours_m,
        reference=ref_m,
        spot_deltas=deltas,
        ours_polyline=route_polyline(ours),
        reference_polyline=[p for leg in ref_legs for p in leg.polyline],
        unmatched_reference_stops=unmatched,
    )


# Reference routes (daytime overlays) may visit stops the profile crawl never
# covered; those legs fall back to straight-line geometry at a nominal night
# driving speed instead of failing the whole diff.
FALLBACK_DRIVE_SPEED_MPS = 30.0 / 3.6


def _chain_legs(
    stop_points: list[GeoPoint],
    stop_refs: list[int | None],
    departure: datetime,
    profiles: ProfileSet,
    workplace: GeoPoint,
) -> list[DriveLeg]:
    legs: list[DriveLeg] = []
    cursor = departure
    prev_ref: object = WORKPLACE_REF
    prev_point = workplace
    for point, ref in zip(stop_points, stop_refs):
        if ref is not None and profiles.has_leg(prev_ref, ref):
            leg = drive_leg(profiles, prev_ref, ref, cursor)
        else:
            dist = max(1.0, haversine_m(prev_point, point))
            leg = DriveLeg(
                from_point=prev_point,
                to_point=point,
                depart=cursor,
                duration_s=dist / FALLBACK_DRIVE_SPEED_MPS,
                distance_m=dist,
                polyline=(prev_point, point),
                extrapolated=True,
            )
        legs.append(leg)
        cursor = cursor + timedelta(seconds=leg.duration_s)
        prev_ref = ref if ref is not None else f"free:{point.lat:.6f},{point.lon:.6f}"
        prev_point = point
    return legs


def _min_walk(walk: WalkMatrix, stop_ids: list[int], spot_id: int) -> float:
    if not stop_ids:
        return math.inf
    return min(walk.dist(stop, spot_id) for stop in stop_ids)


def _min_walk_dura(walk: WalkMatrix, stop_ids: list[int], spot_id: int) -> float:
    if not stop_ids:
        return math.inf
    return min(walk.dura(stop, spot_id) for stop in stop_ids)


def _nearest_stop_metrics(
    stop_ids: list[int],
    route: ShuttleRoute,
    trips: list[TripRecord],
    walk: WalkMatrix,
    direction_spot_ids: list[int],
    window_min: float,
    dwell_s: float,
) -> RouteMetrics:
    driving_dura = math.fsum(leg.duration_s for leg in route.legs)
    if len(route.legs) > 1:
        driving_dura += dwell_s * (len(route.legs) - 1)
    driving_dist = math.fsum(leg.distance_m for leg in route.legs)
    w_total = 0
    dist_sum = dura_sum = 0.0
    reach_w = 0
    for sid in direction_spot_ids:
        w = walk.order_counts[sid]
        d = _min_walk(walk, stop_ids, sid)
        u = _min_walk_dura(walk, stop_ids, sid)
        w_total += w
        dist_sum += w * d
        dura_sum += w * u
        if d <= 800.0:
            reach_w += w
    return RouteMetrics(
        driving_dura=driving_dura,
        driving_dist=driving_dist,
        walk_reach800=reach_w / w_total if w_total else 0.0,
        walk_avg_dura=dura_sum / w_total if w_total else math.inf,
        walk_avg_dist=dist_sum / w_total if w_total else math.inf,
        nums=count_departures_near(trips, route.departure_time, window_min),
    )


def route_polyline(route: ShuttleRoute) -> list[GeoPoint]:
    return [p for leg in route.legs for p in leg.polyline]


def timetable_csv(tt: Timetable, spots: dict[int, DropOffSpot]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["seq", "region_id", "spot_name", "arrival_iso", "cumulative_km"])
    for i, e in enumerate(tt.entries, start=1):
        writer.writerow(
            [i, e.region_id, spots[e.spot_id].name, e.arrival.isoformat(), f"{e.cumulative_distance_m / 1000.0:.3f}"]
        )
    return buf.getvalue()


def reach_band(dist_m: float) -> str:
    for limit in (200, 400, 600, 800):
        if dist_m <= limit:
            return f"<={limit}"
    return ">800"


def route_geojson(
    route: ShuttleRoute,
    tt: Timetable,
    metrics: RouteMetrics,
    regions: list[RegionalCluster],
    walk: WalkMatrix,
    walk_graph,
    spots: dict[int, DropOffSpot],
) -> dict:
    """GeoJSON FeatureCollection: the route line, its stops with per-stop
    metrics, and walking paths from each stop to its region's spots, tagged
    with the reach band."""
    features: list[dict] = [
        {
            "type": "Feature",
            "geometry": {
                "type": "LineString",
                "coordinates": [[p.lon, p.lat] for p in route_polyline(route)],
            },
            "properties": {
                "direction_id": route.direction_id,
                "departure_time": route.departure_time.isoformat(),
                "driving_dura": metrics.driving_dura,
                "driving_dist": metrics.driving_dist,
            },
        }
    ]
    by_region = {r.region_id: r for r in regions}
    arrivals = {e.spot_id: e.arrival for e in tt.entries}
    for region_id, spot_id in route.stops:
        region = by_region[region_id]
        m = stop_metrics(spot_id, region, walk)
        loc = spots[spot_id].location
        features.append(
            {
                "type": "Feature",
                "geometry": {"type": "Point", "coordinates": [loc.lon, loc.lat]},
                "properties": {
                    "region_id": region_id,
                    "spot_id": spot_id,
                    "name": spots[spot_id].name,
                    "arrival": arrivals[spot_id].isoformat(),
                    "avg_dist": m.avg_dist,
                    "avg_dura": m.avg_dura,
                    "dist_cost": m.dist_cost,
                    "reach": {f"{int(b)}": v for b, v in sorted(m.reach.items())},
                },
            }
        )
        for member in region.member_spot_ids:
            if member == spot_id:
                continue
            path = walk_graph.path(spot_id, member) if walk_graph is not None else []
            if not path:
                path = [loc, spots[member].location]
            features.append(
                {
                    "type": "Feature",
                    "geometry": {
                        "type": "LineString",
                        "coordinates": [[p.lon, p.lat] for p in path],
                    },
                    "properties": {
                        "kind": "walking-path",
                        "from_spot": spot_id,
                        "to_spot": member,
                        "reach_band": reach_band(walk.dist(spot_id, member)),
                    },
                }
            )
    return {"type": "FeatureCollection", "features": features}
