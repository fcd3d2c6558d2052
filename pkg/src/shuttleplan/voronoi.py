"""Voronoi grid over the drop-off spots with classified boundary edges.

Geometry runs on an azimuthal-equidistant projection around the spot
centroid, so everything is planar. Cells are built as intersections of the
clip rectangle with the bisector half-planes against each site's Delaunay
neighbors, which partitions the rectangle exactly (up to float rounding).
Each Voronoi edge is classified by what it separates:

  solid   - sites in different travel directions
  dashed  - same direction, different regional clusters
  removed - same regional cluster (not drawn, still reported)
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import QhullError, Voronoi

from .directions import DirectionalClustering
from .errors import ValidationError
from .geo import GeoPoint, LocalProjection
from .regions import RegionalCluster
from .trips import DropOffSpot

CLIP_INFLATION = 0.20

XY = tuple[float, float]
Rect = tuple[float, float, float, float]  # xmin, xmax, ymin, ymax


@dataclass(frozen=True)
class VoronoiEdge:
    site_a: int
    site_b: int
    segment: tuple[GeoPoint, GeoPoint]
    segment_xy: tuple[XY, XY]
    edge_class: str  # solid | dashed | removed


@dataclass
class VoronoiGrid:
    cells: dict[int, list[GeoPoint]]  # closed rings, first == last
    cells_xy: dict[int, list[XY]]
    edges: list[VoronoiEdge]
    clip_xy: Rect
    projection: LocalProjection

    def cell_area_m2(self, spot_id: int) -> float:
        return _polygon_area(self.cells_xy[spot_id])

    def clip_area_m2(self) -> float:
        xmin, xmax, ymin, ymax = self.clip_xy
        return (xmax - xmin) * (ymax - ymin)

    def adjacency(self) -> set[tuple[int, int]]:
        return {(min(e.site_a, e.site_b), max(e.site_a, e.site_b)) for e in self.edges}


def default_clip_rect(xy: np.ndarray) -> Rect:
    """Spot bounding box inflated by 20% so unbounded cells stay drawable."""
    xmin, ymin = xy.min(axis=0)
    xmax, ymax = xy.max(axis=0)
    mx = CLIP_INFLATION * max(xmax - xmin, ymax - ymin, 1.0)
    return (xmin - mx, xmax + mx, ymin - mx, ymax + mx)


def build_voronoi(
    spots: list[DropOffSpot],
    directional: DirectionalClustering,
    regional: list[RegionalCluster],
    clip: Rect | None = None,
) -> VoronoiGrid:
    """Build the clipped, classified Voronoi grid for all spots."""
    if len(spots) < 3:
        raise ValidationError("degenerate site set: need at least 3 spots")
    proj = LocalProjection(_spot_centroid(spots))
    xy = np.array([proj.forward(s.location) for s in spots])
    # collinear sites leave no 2D extent: second singular value is float noise
    svals = np.linalg.svd(xy - xy.mean(axis=0), compute_uv=False)
    if svals[1] < max(1e-9 * svals[0], 1e-6):
        raise ValidationError("degenerate site set: sites are collinear")
    try:
        vor = Voronoi(xy)
    except QhullError:
        raise ValidationError("degenerate site set: sites are collinear") from None

    rect = clip if clip is not None else default_clip_rect(xy)
    xmin, xmax, ymin, ymax = rect
    if not (xmin < xmax and ymin < ymax):
        raise ValidationError("clip rectangle is empty")
    if np.any(xy[:, 0] < xmin) or np.any(xy[:, 0] > xmax) or np.any(xy[:, 1] < ymin) or np.any(
        xy[:, 1] > ymax
    ):
        raise ValidationError("clip rectangle does not contain all spots")

    neighbors: dict[int, list[int]] = {i: [] for i in range(len(spots))}
    for a, b in vor.ridge_points:
        neighbors[int(a)].append(int(b))
        neighbors[int(b)].append(int(a))

    rect_poly = [(xmin, ymin), (xmax, ymin), (xmax, ymax), (xmin, ymax)]
    cells_xy: dict[int, list[XY]] = {}
    cells: dict[int, list[GeoPoint]] = {}
    for i, spot in enumerate(spots):
        poly = rect_poly
        for j in neighbors[i]:
            poly = _clip_halfplane(poly, xy[i], xy[j])
            if not poly:
                break
        ring = poly + poly[:1]
        cells_xy[spot.spot_id] = ring
        cells[spot.spot_id] = [proj.inverse(x, y) for x, y in ring]

    spot_dir = {s.spot_id: directional.assignment[s.spot_id] for s in spots}
    spot_region: dict[int, tuple[int, int]] = {}
    for r in regional:
        for sid in r.member_spot_ids:
            spot_region[sid] = (r.direction_id, r.region_id)

    center = xy.mean(axis=0)
    far = 4.0 * math.hypot(xmax - xmin, ymax - ymin)
    edges: list[VoronoiEdge] = []
    for (a, b), (v1, v2) in zip(vor.ridge_points, vor.ridge_vertices):
        seg = _ridge_segment(vor, int(a), int(b), int(v1), int(v2), center, far)
        if seg is None:
            continue
        clipped = _clip_segment(seg[0], seg[1], rect)
        if clipped is None:
            continue
        p, q = clipped
        if math.hypot(q[0] - p[0], q[1] - p[1]) < 1e-9:
            continue
        sa, sb = spots[int(a)].spot_id, spots[int(b)].spot_id
        edges.append(
            VoronoiEdge(
                site_a=sa,
                site_b=sb,
                segment=(proj.inverse(*p), proj.inverse(*q)),
                segment_xy=(p, q),
                edge_class=classify_edge(sa, sb, spot_dir, spot_region),
            )
        )
    return VoronoiGrid(cells=cells, cells_xy=cells_xy, edges=edges, clip_xy=rect, projection=proj)


def classify_edge(
    site_a: int,
    site_b: int,
    spot_dir: dict[int, int],
    spot_region: dict[int, tuple[int, int]],
) -> str:
    if spot_dir[site_a] != spot_dir[site_b]:
        return "solid"
    if spot_region.get(site_a) != spot_region.get(site_b):
        return "dashed"
    return "removed"


def voronoi_geojson(grid: VoronoiGrid, spot_dir: dict[int, int] | None = None) -> dict:
    """GeoJSON FeatureCollection: cell polygons plus classified boundary lines."""
    features = []
    for spot_id in sorted(grid.cells):
        ring = [[p.lon, p.lat] for p in grid.cells[spot_id]]
        props = {"spot_id": spot_id}
        if spot_dir is not None and spot_id in spot_dir:
            props["direction_id"] = spot_dir[spot_id]
        features.append(
            {
                "type": "Feature",
                "geometry": {"type": "Polygon", "coordinates": [ring]},
                "properties": props,
            }
        )
    for e in grid.edges:
        features.append(
            {
                "type": "Feature",
                "geometry": {
                    "type": "LineString",
                    "coordinates": [[e.segment[0].lon, e.segment[0].lat], [e.segment[1].lon, e.segment[1].lat]],
                },
                "properties": {"class": e.edge_class, "site_a": e.site_a, "site_b": e.site_b},
            }
        )
    return {"type": "FeatureCollection", "features": features}


def voronoi_geojson_text(grid: VoronoiGrid, spot_dir: dict[int, int] | None = None) -> str:
    return json.dumps(voronoi_geojson(grid, spot_dir), sort_keys=True, separators=(",", ":"))


def _spot_centroid(spots: list[DropOffSpot]) -> GeoPoint:
    lat = sum(s.location.lat for s in spots) / len(spots)
    lon = sum(s.location.lon for s in spots) / len(spots)
    return GeoPoint(lat, lon)


def _clip_halfplane(poly: list[XY], site: np.ndarray, other: np.ndarray) -> list[XY]:
    """Sutherland-Hodgman clip of poly to {p : |p-site| <= |p-other|}."""
    nx = float(other[0] - site[0])
    ny = float(other[1] - site[1])
    mx = float(site[0] + other[0]) / 2.0
    my = float(site[1] + other[1]) / 2.0

    def inside(p: XY) -> bool:
        return (p[0] - mx) * nx + (p[1] - my) * ny <= 0.0

    def intersect(p: XY, q: XY) -> XY:
        dp = (p[0] - mx) * nx + (p[1] - my) * ny
        dq = (q[0] - mx) * nx + (q[1] - my) * ny
        t = dp / (dp - dq)
        return (p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1]))

    out: list[XY] = []
    for idx in range(len(poly)):
        cur, nxt = poly[idx], poly[(idx + 1) % len(poly)]
        cur_in, nxt_in = inside(cur), inside(nxt)
        if cur_in:
            out.append(cur)
            if not nxt_in:
                out.append(intersect(cur, nxt))
        elif nxt_in:
            out.append(intersect(cur, nxt))
    return out


def _ridge_segment(
    vor: Voronoi, a: int, b: int, v1: int, v2: int, center: np.ndarray, far: float
) -> tuple[XY, XY] | None:
    if v1 >= 0 and v2 >= 0:
        p = vor.vertices[v1]
        q = vor.vertices[v2]
        return ((float(p[0]), float(p[1])), (float(q[0]), float(q[1])))
    known = v2 if v1 < 0 else v1
    if known < 0:
        return None
    p = vor.vertices[known]
    t = vor.points[b] - vor.points[a]
    norm = math.hypot(float(t[0]), float(t[1]))
    if norm == 0:
        return None
    t = t / norm
    n = np.array([-t[1], t[0]])
    midpoint = (vor.points[a] + vor.points[b]) / 2.0
    direction = n if np.dot(midpoint - center, n) >= 0 else -n
    q = p + direction * far
    return ((float(p[0]), float(p[1])), (float(q[0]), float(q[1])))


def _clip_segment(p: XY, q: XY, rect: Rect) -> tuple[XY, XY] | None:
    """Liang-Barsky clip of segment pq to the rectangle."""
    xmin, xmax, ymin, ymax = rect
    dx, dy = q[0] - p[0], q[1] - p[1]
    t0, t1 = 0.0, 1.0
    for num, den in (
        (xmin - p[0], dx),
        (p[0] - xmax, -dx),
        (ymin - p[1], dy),
        (p[1] - ymax, -dy),
    ):
        if den == 0.0:
            if num > 0.0:
                return None
            continue
        t = num / den
        if den > 0.0:
            if t > t1:
                return None
            t0 = max(t0, t)
        else:
            if t < t0:
                return None
            t1 = min(t1, t)
    if t0 > t1:
        return None
    return (
        (p[0] + t0 * dx, p[1] + t0 * dy),
        (p[0] + t1 * dx, p[1] + t1 * dy),
    )


def _polygon_area(ring: list[XY]) -> float:
    area = 0.0
    for (x1, y1), (x2, y2) in zip(ring, ring[1:]):
        area += x1 * y2 - x2 * y1
    return abs(area) / 2.0
