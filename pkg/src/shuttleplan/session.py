"""Planning sessions: mutable state, invalidation cascade, event-log
persistence, and the deterministic export bundle.

A session owns one loaded dataset plus the planner's choices (k, threshold,
stop overrides, candidate departures). Mutations bump a revision counter and
append to a per-session JSONL event log, so replaying the log (e.g. after a
restart) reconstructs the exact state. Dependent state is invalidated on
upstream changes: a new k clears regions, overrides, and candidates; new
regions clear overrides and candidates.
"""

from __future__ import annotations

import json
import logging
import uuid
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path

from .dataset import PlanningData, load_planning_data
from .directions import (
    DirectionalClustering,
    angle_stats,
    cluster_directions,
    silhouette_curve,
)
from .errors import ConflictError, NotFoundError, ValidationError
from .geo import GeoPoint
from .network import DEFAULT_WALK_SPEED_MPS
from .regions import RegionalCluster, greedy_regions
from .routes import (
    RadarPayload,
    RouteDiff,
    ShuttleRoute,
    check_criteria,
    compare_routes,
    departure_histogram,
    diff_routes,
    route_geojson,
    route_metrics,
    string_route,
    timetable,
    timetable_csv,
)
from .stops import metrics_table_csv, rank_stops, recommend_stop
from .trips import DEFAULT_UNIFY_RADIUS_M, TripRecord
from .voronoi import VoronoiGrid, build_voronoi, voronoi_geojson

log = logging.getLogger(__name__)

MAX_CANDIDATES = 3


@dataclass
class Candidate:
    label: str
    departure_time: datetime


@dataclass
class CreatePayload:
    trips: str
    nodes: str
    edges: str
    profiles: str
    overrides: str | None = None
    workplace: tuple[float, float] | None = None
    unify_radius_m: float = DEFAULT_UNIFY_RADIUS_M
    walk_speed_mps: float = DEFAULT_WALK_SPEED_MPS


class PlanSession:
    def __init__(self, session_id: str, data: PlanningData, create_payload: CreatePayload):
        self.session_id = session_id
        self.data = data
        self.create_payload = create_payload
        self.revision = 0
        self.chosen_k: int | None = None
        self.seed: int | None = None
        self.directional: DirectionalClustering | None = None
        self.regional: dict[int, list[RegionalCluster]] = {}
        self.threshold_m: float | None = None
        self.overrides: dict[tuple[int, int], int] = {}
        self.candidates: dict[int, list[Candidate]] = {}

    # ----- mutations -------------------------------------------------

    def set_k(self, k: int, seed: int) -> None:
        self.directional = cluster_directions(self.data.spots, self.data.workplace, k, seed)
        self.chosen_k = k
        self.seed = seed
        self.regional = {}
        self.threshold_m = None
        self.overrides = {}
        self.candidates = {}
        self.revision += 1

    def build_regions(self, threshold_m: float) -> None:
        if self.directional is None:
            raise ValidationError("set k before building regions")
        by_direction: dict[int, list[int]] = {}
        for sid, d in self.directional.assignment.items():
            by_direction.setdefault(d, []).append(sid)
        weights = {s.spot_id: s.order_count for s in self.data.spots}
        self.regional = {
            d: greedy_regions(sorted(sids), self.data.walk, weights, threshold_m, direction_id=d)
            for d, sids in sorted(by_direction.items())
        }
        self.threshold_m = threshold_m
        self.overrides = {}
        self.candidates = {}
        self.revision += 1

    def set_override(self, direction_id: int, region_id: int, spot_id: int) -> None:
        region = self._region(direction_id, region_id)
        if spot_id not in region.member_spot_ids:
            raise ValidationError(
                f"spot {spot_id} is not a member of region {region_id} in direction {direction_id}"
            )
        self.overrides[(direction_id, region_id)] = spot_id
        self.revision += 1

    def add_candidate(self, direction_id: int, departure_time: datetime, label: str | None) -> Candidate:
        self._require_regions(direction_id)
        existing = self.candidates.setdefault(direction_id, [])
        if len(existing) >= MAX_CANDIDATES:
            raise ConflictError(
                f"candidate list for direction {direction_id} already holds {MAX_CANDIDATES} routes"
            )
        candidate = Candidate(label or departure_time.strftime("%H:%M"), departure_time)
        # validate now: stringing must succeed before the candidate is kept
        self.route_for(direction_id, candidate)
        existing.append(candidate)
        self.revision += 1
        return candidate

    # ----- derived views ----------------------------------------------

    def silhouette_curve(self, k_min: int, k_max: int, seed: int):
        return silhouette_curve(self.data.spots, self.data.workplace, (k_min, k_max), seed)

    def direction_summary(self) -> list[dict]:
        assert self.directional is not None
        stats = angle_stats(self.directional, self.data.spots, self.data.workplace)
        return [
            {
                "direction_id": st.direction_id,
                "centroid_deg": self.directional.centroids[st.direction_id],
                "n_spots": st.n,
                "order_total": st.order_total,
                "angle_stats": {
                    "min": st.min,
                    "q1": st.q1,
                    "median": st.median,
                    "q3": st.q3,
                    "max": st.max,
                },
            }
            for st in stats
        ]

    def voronoi(self) -> VoronoiGrid:
        if self.directional is None or not self.regional:
            raise ValidationError("build regions before requesting the Voronoi grid")
        all_regions = [r for regs in self.regional.values() for r in regs]
        return build_voronoi(self.data.spots, self.directional, all_regions)

    def direction_spots(self, direction_id: int) -> list[int]:
        if self.directional is None:
            raise ValidationError("set k first")
        sids = [sid for sid, d in self.directional.assignment.items() if d == direction_id]
        if not sids:
            raise NotFoundError(f"no such direction {direction_id}")
        return sorted(sids)

    def direction_trips(self, direction_id: int) -> list[TripRecord]:
        sids = set(self.direction_spots(direction_id))
        return [
            t
            for i, t in enumerate(self.data.trips)
            if self.data.spot_of_trip[i] in sids
        ]

    def ranked_stops(self, direction_id: int, metric: str) -> list[dict]:
        self._require_regions(direction_id)
        spots = self.data.spots_by_id
        out = []
        for region in self.regional[direction_id]:
            ranked = rank_stops(region, self.data.walk, metric)
            chosen = self.overrides.get(
                (direction_id, region.region_id), recommend_stop(region, self.data.walk)
            )
            out.append(
                {
                    "region_id": region.region_id,
                    "order_total": region.order_total,
                    "chosen_spot_id": chosen,
                    "ranked": [
                        {
                            "spot_id": sid,
                            "name": spots[sid].name,
                            "order_count": spots[sid].order_count,
                            "avg_dist": m.avg_dist,
                            "avg_dura": m.avg_dura,
                            "dist_cost": m.dist_cost,
                            "reach": {f"{int(b)}": v for b, v in sorted(m.reach.items())},
                        }
                        for sid, m in ranked
                    ],
                }
            )
        return out

    def histogram(self, direction_id: int, bin_min: int) -> list[tuple[datetime, int]]:
        return departure_histogram(self.direction_trips(direction_id), bin_min)

    def route_for(self, direction_id: int, candidate: Candidate) -> ShuttleRoute:
        regions = self._require_regions(direction_id)
        overrides = {
            region_id: sid
            for (d, region_id), sid in self.overrides.items()
            if d == direction_id
        }
        return string_route(
            direction_id,
            regions,
            overrides,
            candidate.departure_time,
            self.data.profiles,
            self.data.walk,
            self.data.workplace,
            self.data.spots_by_id,
        )

    def candidate_payload(self, direction_id: int, candidate: Candidate) -> dict:
        route = self.route_for(direction_id, candidate)
        regions = self.regional[direction_id]
        tt = timetable(route)
        metrics = route_metrics(route, self.direction_trips(direction_id), self.data.walk, regions)
        spots = self.data.spots_by_id
        return {
            "label": candidate.label,
            "departure_time": candidate.departure_time.isoformat(),
            "stops": [
                {
                    "region_id": region_id,
                    "spot_id": spot_id,
                    "name": spots[spot_id].name,
                    "lat": spots[spot_id].location.lat,
                    "lon": spots[spot_id].location.lon,
                }
                for region_id, spot_id in route.stops
            ],
            "timetable": [
                {
                    "region_id": e.region_id,
                    "spot_id": e.spot_id,
                    "arrival": e.arrival.isoformat(),
                    "cumulative_distance_m": e.cumulative_distance_m,
                }
                for e in tt.entries
            ],
            "metrics": {
                "driving_dura": metrics.driving_dura,
                "driving_dist": metrics.driving_dist,
                "walk_reach800": metrics.walk_reach800,
                "walk_avg_dura": metrics.walk_avg_dura,
                "walk_avg_dist": metrics.walk_avg_dist,
                "nums": metrics.nums,
            },
            "warnings": check_criteria(route, self.data.workplace),
            "polyline": [[p.lat, p.lon] for leg in route.legs for p in leg.polyline],
        }

    def compare(self, direction_id: int) -> RadarPayload:
        cands = self.candidates.get(direction_id)
        if not cands:
            raise ValidationError(f"direction {direction_id} has no candidates to compare")
        labeled = [(c.label, self.route_for(direction_id, c)) for c in cands]
        return compare_routes(
            labeled,
            self.direction_trips(direction_id),
            self.data.walk,
            self.regional[direction_id],
        )

    def diff(self, direction_id: int, reference_stops: list[GeoPoint], reference_departure: datetime) -> RouteDiff:
        cands = self.candidates.get(direction_id)
        if not cands:
            raise ValidationError(f"direction {direction_id} has no candidate route to diff")
        ours = self.route_for(direction_id, cands[-1])
        return diff_routes(
            ours,
            reference_stops,
            reference_departure,
            self.direction_trips(direction_id),
            self.data.walk,
            self.data.spots_by_id,
            self.direction_spots(direction_id),
            self.data.profiles,
            self.data.workplace,
        )

    def export_bundle(self) -> dict:
        """Deterministic GeoJSON + CSV bundle of the current plan.

        Content depends only on the dataset and the mutation history, never
        on session identity or wall-clock time, so identical histories give
        byte-identical bundles.
        """
        files: dict[str, str] = {}
        if self.directional is not None and self.regional:
            grid = self.voronoi()
            spot_dir = dict(self.directional.assignment)
            files["voronoi.geojson"] = json.dumps(
                voronoi_geojson(grid, spot_dir), sort_keys=True, separators=(",", ":")
            )
            all_regions = [r for regs in self.regional.values() for r in regs]
            files["stop_metrics.csv"] = metrics_table_csv(
                all_regions, self.data.walk, self.data.spots_by_id
            )
            for d, cands in sorted(self.candidates.items()):
                regions = self.regional[d]
                for i, c in enumerate(cands):
                    route = self.route_for(d, c)
                    tt = timetable(route)
                    metrics = route_metrics(
                        route, self.direction_trips(d), self.data.walk, regions
                    )
                    stem = f"direction-{d}/candidate-{i}-{_slug(c.label)}"
                    files[stem + ".geojson"] = json.dumps(
                        route_geojson(
                            route,
                            tt,
                            metrics,
                            regions,
                            self.data.walk,
                            self.data.walk_graph,
                            self.data.spots_by_id,
                        ),
                        sort_keys=True,
                        separators=(",", ":"),
                    )
                    files[stem + "-timetable.csv"] = timetable_csv(tt, self.data.spots_by_id)
        return {"revision": self.revision, "files": files}

    # ----- helpers -----------------------------------------------------

    def _region(self, direction_id: int, region_id: int) -> RegionalCluster:
        regions = self._require_regions(direction_id)
        for r in regions:
            if r.region_id == region_id:
                return r
        raise NotFoundError(f"no region {region_id} in direction {direction_id}")

    def _require_regions(self, direction_id: int) -> list[RegionalCluster]:
        if not self.regional:
            raise ValidationError("build regions first")
        if direction_id not in self.regional:
            raise NotFoundError(f"no such direction {direction_id}")
        return self.regional[direction_id]

    def spots_summary(self) -> list[dict]:
        assignment = self.directional.assignment if self.directional else {}
        return [
            {
                "spot_id": s.spot_id,
                "name": s.name,
                "lat": s.location.lat,
                "lon": s.location.lon,
                "order_count": s.order_count,
                "direction_id": assignment.get(s.spot_id),
            }
            for s in self.data.spots
        ]


def _slug(label: str) -> str:
    return "".join(c if c.isalnum() or c in "-_" else "-" for c in label)


class SessionStore:
    """Owns sessions and their append-only event logs."""

    def __init__(self, log_dir: str | Path, data_dir: str | Path | None = None):
        self.log_dir = Path(log_dir)
        self.log_dir.mkdir(parents=True, exist_ok=True)
        self.data_dir = Path(data_dir) if data_dir is not None else None
        self.sessions: dict[str, PlanSession] = {}

    def _resolve(self, path: str) -> Path:
        p = Path(path)
        if not p.is_absolute() and self.data_dir is not None:
            return self.data_dir / p
        return p

    def _log_path(self, session_id: str) -> Path:
        return self.log_dir / f"{session_id}.jsonl"

    def create(self, payload: CreatePayload, session_id: str | None = None, log_event: bool = True) -> PlanSession:
        sid = session_id or uuid.uuid4().hex[:12]
        workplace = GeoPoint(*payload.workplace) if payload.workplace else None
        data = load_planning_data(
            self._resolve(payload.trips),
            self._resolve(payload.nodes),
            self._resolve(payload.edges),
            self._resolve(payload.profiles),
            self._resolve(payload.overrides) if payload.overrides else None,
            workplace=workplace,
            unify_radius_m=payload.unify_radius_m,
            walk_speed_mps=payload.walk_speed_mps,
        )
        session = PlanSession(sid, data, payload)
        self.sessions[sid] = session
        if log_event:
            self._append(sid, "create", payload.__dict__)
        return session

    def get(self, session_id: str) -> PlanSession:
        try:
            return self.sessions[session_id]
        except KeyError:
            raise NotFoundError(f"unknown session {session_id}") from None

    def apply(self, session_id: str, op: str, payload: dict, expected_revision: int | None = None) -> PlanSession:
        """Apply a mutation, enforcing optimistic concurrency when the caller
        supplies an expected revision."""
        session = self.get(session_id)
        if expected_revision is not None and expected_revision != session.revision:
            raise ConflictError(
                f"revision mismatch: expected {expected_revision}, session is at {session.revision}"
            )
        self._dispatch(session, op, payload)
        self._append(session_id, op, payload)
        return session

    def _dispatch(self, session: PlanSession, op: str, payload: dict) -> None:
        if op == "set_k":
            session.set_k(int(payload["k"]), int(payload["seed"]))
        elif op == "build_regions":
            session.build_regions(float(payload["threshold_m"]))
        elif op == "set_override":
            session.set_override(
                int(payload["direction_id"]), int(payload["region_id"]), int(payload["spot_id"])
            )
        elif op == "add_candidate":
            session.add_candidate(
                int(payload["direction_id"]),
                datetime.fromisoformat(payload["departure_time"]),
                payload.get("label"),
            )
        else:
            raise ValidationError(f"unknown session op {op!r}")

    def _append(self, session_id: str, op: str, payload: dict) -> None:
        event = {"op": op, "payload": payload}
        with open(self._log_path(session_id), "a", encoding="utf-8") as f:
            f.write(json.dumps(event, sort_keys=True) + "\n")

    def export(self, session_id: str) -> dict:
        """Export the session bundle and snapshot it next to the event log."""
        session = self.get(session_id)
        bundle = session.export_bundle()
        snapshot = self.log_dir / f"{session_id}-export-r{session.revision}.json"
        snapshot.write_text(json.dumps(bundle, sort_keys=True), encoding="utf-8")
        return bundle

    def load_existing(self) -> list[str]:
        """Replay every event log found in log_dir; returns restored ids."""
        restored = []
        for path in sorted(self.log_dir.glob("*.jsonl")):
            sid = path.stem
            if sid in self.sessions:
                continue
            try:
                self._replay(sid, path)
                restored.append(sid)
            except Exception:
                log.exception("could not replay session log %s", path)
        return restored

    def _replay(self, session_id: str, path: Path) -> None:
        with open(path, encoding="utf-8") as f:
            events = [json.loads(line) for line in f if line.strip()]
        if not events or events[0]["op"] != "create":
            raise ValidationError(f"{path}: log does not start with a create event")
        payload = events[0]["payload"]
        payload.setdefault("overrides", None)
        payload.setdefault("workplace", None)
        if payload.get("workplace"):
            payload["workplace"] = tuple(payload["workplace"])
        self.create(CreatePayload(**payload), session_id=session_id, log_event=False)
        session = self.sessions[session_id]
        for event in events[1:]:
            self._dispatch(session, event["op"], event["payload"])
