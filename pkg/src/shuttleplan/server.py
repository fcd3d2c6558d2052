"""JSON-over-HTTP planning service.

One session per loaded dataset; mutations are serialized per session and
protected by optimistic concurrency: clients echo the last seen revision in
If-Match and get 409 on mismatch. Engine errors map to HTTP statuses:
validation 422, unknown id 404, conflicts 409.
"""

from __future__ import annotations

from datetime import datetime
from typing import Optional

from fastapi import FastAPI, Header, HTTPException, Query, Request
from pydantic import BaseModel, Field

from .errors import ConflictError, NotFoundError, PlanningError, ValidationError
from .geo import GeoPoint
from .network import DEFAULT_WALK_SPEED_MPS
from .regions import DEFAULT_THRESHOLD_M
from .session import CreatePayload, SessionStore
from .trips import DEFAULT_UNIFY_RADIUS_M
from .voronoi import voronoi_geojson


class CreateSessionBody(BaseModel):
    trips: str
    nodes: str
    edges: str
    profiles: str
    overrides: Optional[str] = None
    workplace: Optional[tuple[float, float]] = None
    unify_radius_m: float = DEFAULT_UNIFY_RADIUS_M
    # None -> the server's configured default
    walk_speed_mps: Optional[float] = None


class SetKBody(BaseModel):
    k: int = Field(ge=1)
    seed: int = 0


class RegionsBody(BaseModel):
    threshold_m: Optional[float] = None


class OverrideBody(BaseModel):
    region_id: int
    spot_id: int


class CandidateBody(BaseModel):
    departure_time: datetime
    label: Optional[str] = None


def _if_match_revision(if_match: str | None) -> int | None:
    if if_match is None:
        return None
    try:
        return int(if_match.strip().strip('"'))
    except ValueError:
        raise HTTPException(status_code=400, detail=f"If-Match must be a revision integer, got {if_match!r}")


def create_app(
    session_log_dir: str,
    data_dir: str | None = None,
    threshold_default: float = DEFAULT_THRESHOLD_M,
    walk_speed_default: float = DEFAULT_WALK_SPEED_MPS,
    restore_sessions: bool = True,
) -> FastAPI:
    store = SessionStore(session_log_dir, data_dir)
    if restore_sessions:
        store.load_existing()

    app = FastAPI(title="shuttleplan", version="0.1.0")
    app.state.store = store

    @app.exception_handler(PlanningError)
    async def planning_error_handler(_request: Request, exc: PlanningError):
        from fastapi.responses import JSONResponse

        status = 422
        if isinstance(exc, NotFoundError):
            status = 404
        elif isinstance(exc, ConflictError):
            status = 409
        return JSONResponse(status_code=status, content={"detail": str(exc)})

    @app.post("/sessions", status_code=201)
    def create_session(body: CreateSessionBody):
        payload = CreatePayload(
            trips=body.trips,
            nodes=body.nodes,
            edges=body.edges,
            profiles=body.profiles,
            overrides=body.overrides,
            workplace=body.workplace,
            unify_radius_m=body.unify_radius_m,
            walk_speed_mps=body.walk_speed_mps if body.walk_speed_mps is not None else walk_speed_default,
        )
        session = store.create(payload)
        return {
            "session_id": session.session_id,
            "revision": session.revision,
            "n_trips": len(session.data.trips),
            "n_rejects": len(session.data.rejects),
            "n_spots": len(session.data.spots),
            "warnings": session.data.warnings,
        }

    @app.get("/sessions/{session_id}")
    def session_summary(session_id: str):
        s = store.get(session_id)
        return {
            "session_id": s.session_id,
            "revision": s.revision,
            "chosen_k": s.chosen_k,
            "threshold_m": s.threshold_m,
            "workplace": [s.data.workplace.lat, s.data.workplace.lon],
            "spots": s.spots_summary(),
            "directions": s.direction_summary() if s.directional else [],
            "candidates": {
                str(d): [c.label for c in cands] for d, cands in s.candidates.items()
            },
        }

    @app.get("/sessions/{session_id}/silhouette")
    def silhouette(session_id: str, kmin: int = Query(2), kmax: int = Query(12), seed: int = Query(0)):
        s = store.get(session_id)
        curve = s.silhouette_curve(kmin, min(kmax, len(s.data.spots) - 1), seed)
        return {
            "points": [{"k": p.k, "silhouette": p.silhouette} for p in curve.points],
            "best_k": curve.best_k,
        }

    @app.put("/sessions/{session_id}/k")
    def set_k(session_id: str, body: SetKBody, if_match: Optional[str] = Header(default=None)):
        s = store.apply(session_id, "set_k", body.model_dump(), _if_match_revision(if_match))
        return {
            "revision": s.revision,
            "k": s.chosen_k,
            "assignment": {str(k): v for k, v in s.directional.assignment.items()},
            "directions": s.direction_summary(),
        }

    @app.post("/sessions/{session_id}/regions")
    def build_regions(session_id: str, body: RegionsBody, if_match: Optional[str] = Header(default=None)):
        threshold = body.threshold_m if body.threshold_m is not None else threshold_default
        s = store.apply(
            session_id, "build_regions", {"threshold_m": threshold}, _if_match_revision(if_match)
        )
        grid = s.voronoi()
        return {
            "revision": s.revision,
            "threshold_m": threshold,
            "directions": [
                {
                    "direction_id": d,
                    "regions": [
                        {
                            "region_id": r.region_id,
                            "member_spot_ids": r.member_spot_ids,
                            "order_total": r.order_total,
                            "seed_spot_id": r.seed_spot_id,
                        }
                        for r in regs
                    ],
                }
                for d, regs in sorted(s.regional.items())
            ],
            "voronoi": voronoi_geojson(grid, dict(s.directional.assignment)),
        }

    @app.get("/sessions/{session_id}/directions/{direction_id}/stops")
    def ranked_stops(session_id: str, direction_id: int, metric: str = Query("avg_dist")):
        s = store.get(session_id)
        return {
            "direction_id": direction_id,
            "metric": metric,
            "regions": s.ranked_stops(direction_id, metric),
        }

    @app.put("/sessions/{session_id}/directions/{direction_id}/override")
    def set_override(
        session_id: str,
        direction_id: int,
        body: OverrideBody,
        if_match: Optional[str] = Header(default=None),
    ):
        payload = {"direction_id": direction_id, **body.model_dump()}
        s = store.apply(session_id, "set_override", payload, _if_match_revision(if_match))
        cands = s.candidates.get(direction_id, [])
        return {
            "revision": s.revision,
            "candidates": [s.candidate_payload(direction_id, c) for c in cands],
        }

    @app.get("/sessions/{session_id}/directions/{direction_id}/histogram")
    def histogram(session_id: str, direction_id: int, bin: int = Query(5, ge=1)):
        s = store.get(session_id)
        return {
            "direction_id": direction_id,
            "bin_min": bin,
            "bins": [
                {"start": start.isoformat(), "count": count}
                for start, count in s.histogram(direction_id, bin)
            ],
        }

    @app.post("/sessions/{session_id}/directions/{direction_id}/candidates", status_code=201)
    def add_candidate(
        session_id: str,
        direction_id: int,
        body: CandidateBody,
        if_match: Optional[str] = Header(default=None),
    ):
        payload = {
            "direction_id": direction_id,
            "departure_time": body.departure_time.isoformat(),
            "label": body.label,
        }
        s = store.apply(session_id, "add_candidate", payload, _if_match_revision(if_match))
        candidate = s.candidates[direction_id][-1]
        return {
            "revision": s.revision,
            "candidate": s.candidate_payload(direction_id, candidate),
        }

    @app.get("/sessions/{session_id}/directions/{direction_id}/compare")
    def compare(session_id: str, direction_id: int):
        s = store.get(session_id)
        payload = s.compare(direction_id)
        return {
            "entries": [
                {
                    "label": e.label,
                    "metrics": {
                        "driving_dura": e.metrics.driving_dura,
                        "driving_dist": e.metrics.driving_dist,
                        "walk_reach800": e.metrics.walk_reach800,
                        "walk_avg_dura": e.metrics.walk_avg_dura,
                        "walk_avg_dist": e.metrics.walk_avg_dist,
                        "nums": e.metrics.nums,
                    },
                    "normalized": e.normalized,
                }
                for e in payload.entries
            ],
            "axes": payload.axes,
        }

    @app.post("/sessions/{session_id}/directions/{direction_id}/diff")
    def diff(session_id: str, direction_id: int, reference: dict):
        s = store.get(session_id)
        stops, departure = _parse_reference_geojson(reference)
        report = s.diff(direction_id, stops, departure)
        return {
            "ours": _metrics_dict(report.ours),
            "reference": _metrics_dict(report.reference),
            "spot_deltas": [
                {
                    "spot_id": d.spot_id,
                    "ours_m": _json_num(d.ours_m),
                    "reference_m": _json_num(d.reference_m),
                    "delta_m": _json_num(d.delta_m),
                }
                for d in report.spot_deltas
            ],
            "ours_polyline": [[p.lat, p.lon] for p in report.ours_polyline],
            "reference_polyline": [[p.lat, p.lon] for p in report.reference_polyline],
            "unmatched_reference_stops": [
                [p.lat, p.lon] for p in report.unmatched_reference_stops
            ],
        }

    @app.get("/sessions/{session_id}/export")
    def export(session_id: str):
        return store.export(session_id)

    return app


def _json_num(x: float) -> float | None:
    import math

    return None if math.isinf(x) or math.isnan(x) else x


def _metrics_dict(m) -> dict:
    return {
        "driving_dura": _json_num(m.driving_dura),
        "driving_dist": _json_num(m.driving_dist),
        "walk_reach800": _json_num(m.walk_reach800),
        "walk_avg_dura": _json_num(m.walk_avg_dura),
        "walk_avg_dist": _json_num(m.walk_avg_dist),
        "nums": m.nums,
    }


def _parse_reference_geojson(doc: dict) -> tuple[list[GeoPoint], datetime]:
    """Reference route: FeatureCollection of Point features in stop order.

    departure_time may sit on the collection properties or any feature.
    """
    if doc.get("type") != "FeatureCollection":
        raise ValidationError("reference must be a GeoJSON FeatureCollection")
    departure: datetime | None = None
    props = doc.get("properties") or {}
    if "departure_time" in props:
        departure = datetime.fromisoformat(props["departure_time"])
    stops: list[GeoPoint] = []
    for feature in doc.get("features", []):
        geom = feature.get("geometry") or {}
        fprops = feature.get("properties") or {}
        if departure is None and "departure_time" in fprops:
            departure = datetime.fromisoformat(fprops["departure_time"])
        if geom.get("type") == "Point":
            lon, lat = geom["coordinates"]
            stops.append(GeoPoint(lat, lon))
        elif geom.get("type") == "LineString":
            for lon, lat in geom["coordinates"]:
                stops.append(GeoPoint(lat, lon))
    if not stops:
        raise ValidationError("reference contains no stop geometry")
    if departure is None:
        raise ValidationError("reference is missing a departure_time property")
    return stops, departure
