"""Voronoi grid construction against a hand-derived 5-site fixture.

Fixture: four corners of a 1000 m square plus its center. Hand geometry:
the center cell is the diamond through the four edge midpoints; its four
edges separate center from each corner; four rays separate adjacent corner
pairs; diagonal corner pairs share no edge.
"""

import math

import pytest

from shuttleplan.directions import DirectionalClustering
from shuttleplan.errors import ValidationError
from shuttleplan.geo import GeoPoint, destination_point
from shuttleplan.regions import RegionalCluster
from shuttleplan.trips import DropOffSpot
from shuttleplan.voronoi import build_voronoi, voronoi_geojson

CENTER = GeoPoint(22.54, 114.05)
HALF = 500.0  # half side of the square, meters

# spot ids: 0 center, 1 NE, 2 NW, 3 SW, 4 SE
CORNER_BEARINGS = {1: 45.0, 2: 315.0, 3: 225.0, 4: 135.0}


def five_site_spots():
    spots = [DropOffSpot(0, CENTER, "center", 1)]
    diag = HALF * math.sqrt(2.0)
    for sid, bearing in sorted(CORNER_BEARINGS.items()):
        spots.append(
            DropOffSpot(sid, destination_point(CENTER, bearing, diag), f"corner-{sid}", 1)
        )
    return spots


def clustering(assignment, k):
    return DirectionalClustering(k=k, assignment=assignment, centroids=[0.0] * k, seed=0)


def region(direction_id, region_id, members):
    return RegionalCluster(direction_id, region_id, list(members), len(members), members[0])


def test_two_sites_degenerate():
    spots = five_site_spots()[:2]
    with pytest.raises(ValidationError, match="degenerate"):
        build_voronoi(spots, clustering({0: 0, 1: 0}, 1), [region(0, 0, [0, 1])])


def test_collinear_sites_degenerate():
    pts = [destination_point(CENTER, 90.0, d) for d in (0, 500, 1000)]
    spots = [DropOffSpot(i, p, f"s{i}", 1) for i, p in enumerate(pts)]
    with pytest.raises(ValidationError, match="degenerate"):
        build_voronoi(
            spots, clustering({0: 0, 1: 0, 2: 0}, 1), [region(0, 0, [0, 1, 2])]
        )


def five_site_grid(directions=None, regions=None):
    spots = five_site_spots()
    if directions is None:
        # center alone in direction 1; corners in direction 0
        directions = {0: 1, 1: 0, 2: 0, 3: 0, 4: 0}
    if regions is None:
        # corners split into {NE, NW} and {SW, SE}; center its own region
        regions = [
            region(1, 0, [0]),
            region(0, 0, [1, 2]),
            region(0, 1, [3, 4]),
        ]
    k = len(set(directions.values()))
    return spots, build_voronoi(spots, clustering(directions, k), regions)


def test_fixture_adjacency_matches_hand_derivation():
    _, grid = five_site_grid()
    expected = {
        (0, 1), (0, 2), (0, 3), (0, 4),   # center vs each corner
        (1, 2), (3, 4),                   # north pair, south pair
        (1, 4), (2, 3),                   # east pair, west pair
    }
    assert grid.adjacency() == expected  # no diagonal corner pairs


def test_fixture_edge_classification():
    _, grid = five_site_grid()
    classes = {(min(e.site_a, e.site_b), max(e.site_a, e.site_b)): e.edge_class for e in grid.edges}
    for corner in (1, 2, 3, 4):
        assert classes[(0, corner)] == "solid"
    assert classes[(1, 2)] == "removed"   # same direction, same region
    assert classes[(3, 4)] == "removed"
    assert classes[(1, 4)] == "dashed"    # same direction, different regions
    assert classes[(2, 3)] == "dashed"


def test_fixture_center_cell_is_the_diamond():
    _, grid = five_site_grid()
    area = grid.cell_area_m2(0)
    # diamond through the edge midpoints: 2 * HALF^2
    assert area == pytest.approx(2 * HALF * HALF, rel=1e-3)


def test_cells_partition_clip_rectangle():
    spots, grid = five_site_grid()
    total = sum(grid.cell_area_m2(s.spot_id) for s in spots)
    assert abs(total - grid.clip_area_m2()) / grid.clip_area_m2() < 1e-6


def test_all_sites_one_region_all_edges_removed():
    directions = {i: 0 for i in range(5)}
    regions = [region(0, 0, [0, 1, 2, 3, 4])]
    _, grid = five_site_grid(directions, regions)
    assert len(grid.edges) == 8
    assert {e.edge_class for e in grid.edges} == {"removed"}


def test_voronoi_duality_with_delaunay(small_dataset):
    """Sites share a Voronoi edge exactly when they are Delaunay neighbors."""
    import numpy as np
    from scipy.spatial import Delaunay

    from shuttleplan.directions import cluster_directions
    from shuttleplan.geo import LocalProjection
    from shuttleplan.trips import unify_locations

    spots, _ = unify_locations(small_dataset.trips)
    workplace = small_dataset.trips[0].origin
    c = cluster_directions(spots, workplace, 4, seed=0)
    regions = [
        RegionalCluster(d, 0, [s.spot_id for s in spots if c.assignment[s.spot_id] == d], 1, 0)
        for d in range(4)
    ]
    grid = build_voronoi(spots, c, regions)

    proj = LocalProjection(
        GeoPoint(
            sum(s.location.lat for s in spots) / len(spots),
            sum(s.location.lon for s in spots) / len(spots),
        )
    )
    xy = np.array([proj.forward(s.location) for s in spots])
    tri = Delaunay(xy)
    delaunay_edges = set()
    for simplex in tri.simplices:
        for i in range(3):
            a, b = int(simplex[i]), int(simplex[(i + 1) % 3])
            sa, sb = spots[a].spot_id, spots[b].spot_id
            delaunay_edges.add((min(sa, sb), max(sa, sb)))
    assert grid.adjacency() == delaunay_edges


def test_geojson_export_shape():
    spots, grid = five_site_grid()
    doc = voronoi_geojson(grid, {0: 1, 1: 0, 2: 0, 3: 0, 4: 0})
    assert doc["type"] == "FeatureCollection"
    polys = [f for f in doc["features"] if f["geometry"]["type"] == "Polygon"]
    lines = [f for f in doc["features"] if f["geometry"]["type"] == "LineString"]
    assert len(polys) == 5
    assert len(lines) == 8
    assert {f["properties"]["class"] for f in lines} == {"solid", "dashed", "removed"}
    for f in polys:
        ring = f["geometry"]["coordinates"][0]
        assert ring[0] == ring[-1]


def test_clip_rect_must_contain_spots():
    spots = five_site_spots()
    with pytest.raises(ValidationError, match="clip"):
        build_voronoi(
            spots,
            clustering({i: 0 for i in range(5)}, 1),
            [region(0, 0, [0, 1, 2, 3, 4])],
            clip=(-10.0, 10.0, -10.0, 10.0),
        )
