"""Road network model and walking shortest paths.

The network is a directed geometric graph (intersections + road segments).
Walking distances between drop-off spots come from per-spot single-source
Dijkstra runs over the walk-mode subgraph; each spot is snapped to its
nearest walk node and the snap offsets are added on both ends. Unreachable
pairs are +inf so downstream clustering logic stays total.

Durations default to distance / walk_speed. Edges may carry an explicit
walking duration (footbridges, underpasses) in which case a second
duration-weighted run produces the duration matrix, letting distance and
duration rank stops differently.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Iterable, TextIO

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra
from scipy.spatial import cKDTree

from .errors import ValidationError
from .geo import GeoPoint, LocalProjection, haversine_m
from .trips import DropOffSpot

DEFAULT_WALK_SPEED_MPS = 1.2
SNAP_TOLERANCE_M = 500.0

# Projection rounding can make a straight segment marginally shorter than the
# great-circle distance between its endpoints; anything below this factor is
# a data error.
MIN_LENGTH_FACTOR = 0.99


@dataclass(frozen=True)
class RoadEdge:
    from_node: str
    to_node: str
    length_m: float
    modes: frozenset[str]
    walk_dura_s: float | None = None


@dataclass
class RoadNetwork:
    nodes: dict[str, GeoPoint]
    edges: list[RoadEdge] = field(default_factory=list)

    def validate(self) -> None:
        for e in self.edges:
            if e.from_node not in self.nodes or e.to_node not in self.nodes:
                raise ValidationError(f"edge {e.from_node}->{e.to_node} references unknown node")
            if e.length_m <= 0:
                raise ValidationError(f"edge {e.from_node}->{e.to_node} has non-positive length")
            gc = haversine_m(self.nodes[e.from_node], self.nodes[e.to_node])
            if e.length_m < gc * MIN_LENGTH_FACTOR:
                raise ValidationError(
                    f"edge {e.from_node}->{e.to_node} shorter than straight line "
                    f"({e.length_m:.1f} m < {gc:.1f} m)"
                )


def load_nodes_csv(source: TextIO | Iterable[str]) -> dict[str, GeoPoint]:
    reader = csv.reader(source)
    header = next(reader, None)
    if header != ["id", "lat", "lon"]:
        raise ValidationError("malformed nodes header: expected id,lat,lon")
    nodes: dict[str, GeoPoint] = {}
    for row in reader:
        if not row:
            continue
        nodes[row[0]] = GeoPoint(float(row[1]), float(row[2]))
    return nodes


def load_edges_csv(source: TextIO | Iterable[str]) -> list[RoadEdge]:
    reader = csv.reader(source)
    header = next(reader, None)
    if header not in (
        ["from", "to", "length_m", "modes"],
        ["from", "to", "length_m", "modes", "walk_dura_s"],
    ):
        raise ValidationError("malformed edges header: expected from,to,length_m,modes[,walk_dura_s]")
    has_dura = header is not None and len(header) == 5
    edges: list[RoadEdge] = []
    for row in reader:
        if not row:
            continue
        modes = frozenset(m for m in row[3].split("|") if m)
        if not modes <= {"walk", "drive"}:
            raise ValidationError(f"unknown mode in {row[3]!r}")
        dura = None
        if has_dura and len(row) > 4 and row[4] != "":
            dura = float(row[4])
        edges.append(RoadEdge(row[0], row[1], float(row[2]), modes, dura))
    return edges


def load_network(nodes_source, edges_source) -> RoadNetwork:
    net = RoadNetwork(load_nodes_csv(nodes_source), load_edges_csv(edges_source))
    net.validate()
    return net


def write_network_csv(net: RoadNetwork, nodes_out: TextIO, edges_out: TextIO) -> None:
    nw = csv.writer(nodes_out, lineterminator="\n")
    nw.writerow(["id", "lat", "lon"])
    for node_id in sorted(net.nodes):
        p = net.nodes[node_id]
        nw.writerow([node_id, repr(p.lat), repr(p.lon)])
    ew = csv.writer(edges_out, lineterminator="\n")
    ew.writerow(["from", "to", "length_m", "modes", "walk_dura_s"])
    for e in net.edges:
        ew.writerow(
            [
                e.from_node,
                e.to_node,
                repr(e.length_m),
                "|".join(sorted(e.modes)),
                "" if e.walk_dura_s is None else repr(e.walk_dura_s),
            ]
        )


@dataclass
class WalkMatrix:
    """Spot-to-spot walking distances (m) and durations (s); +inf = unreachable.

    Carries the spots' order counts so demand-weighted consumers only need
    the matrix.
    """

    spot_ids: list[int]
    dist_m: np.ndarray
    dura_s: np.ndarray
    order_counts: dict[int, int]

    def index_of(self, spot_id: int) -> int:
        return self._index[spot_id]

    def __post_init__(self) -> None:
        self._index = {s: i for i, s in enumerate(self.spot_ids)}

    def dist(self, a: int, b: int) -> float:
        return float(self.dist_m[self._index[a], self._index[b]])

    def dura(self, a: int, b: int) -> float:
        return float(self.dura_s[self._index[a], self._index[b]])


class WalkGraph:
    """Walk-mode subgraph with the spots snapped onto it.

    Keeps the CSR adjacency and snap data around so walking-path geometry can
    be reconstructed later for exports (the matrix alone loses the paths).
    """

    def __init__(
        self,
        network: RoadNetwork,
        spots: list[DropOffSpot],
        walk_speed_mps: float = DEFAULT_WALK_SPEED_MPS,
    ):
        if walk_speed_mps <= 0:
            raise ValidationError("walk speed must be positive")
        self.network = network
        self.spots = list(spots)
        self.walk_speed_mps = walk_speed_mps

        walk_nodes: set[str] = set()
        for e in network.edges:
            if "walk" in e.modes:
                walk_nodes.add(e.from_node)
                walk_nodes.add(e.to_node)
        if not walk_nodes:
            raise ValidationError("network has no walk-mode edges")
        self._node_ids = sorted(walk_nodes)
        self._node_index = {n: i for i, n in enumerate(self._node_ids)}

        n = len(self._node_ids)
        # parallel edges keep the cheaper weight (csr would sum duplicates)
        best_dist: dict[tuple[int, int], float] = {}
        best_dura: dict[tuple[int, int], float] = {}
        self._has_dura_overrides = False
        for e in network.edges:
            if "walk" not in e.modes:
                continue
            key = (self._node_index[e.from_node], self._node_index[e.to_node])
            dura = e.walk_dura_s if e.walk_dura_s is not None else e.length_m / walk_speed_mps
            if e.walk_dura_s is not None:
                self._has_dura_overrides = True
            if key not in best_dist or e.length_m < best_dist[key]:
                best_dist[key] = e.length_m
            if key not in best_dura or dura < best_dura[key]:
                best_dura[key] = dura
        keys = list(best_dist)
        rows = [k[0] for k in keys]
        cols = [k[1] for k in keys]
        self._dist_csr = csr_matrix(([best_dist[k] for k in keys], (rows, cols)), shape=(n, n))
        self._dura_csr = csr_matrix(([best_dura[k] for k in keys], (rows, cols)), shape=(n, n))

        proj = LocalProjection(_centroid([network.nodes[i] for i in self._node_ids]))
        xy = np.array([proj.forward(network.nodes[i]) for i in self._node_ids])
        tree = cKDTree(xy)
        self.snap_node: list[int] = []
        self.snap_offset_m: list[float] = []
        for spot in self.spots:
            _, idx = tree.query(proj.forward(spot.location))
            node_pt = network.nodes[self._node_ids[int(idx)]]
            offset = haversine_m(spot.location, node_pt)
            if offset > SNAP_TOLERANCE_M:
                raise ValidationError(
                    f"spot {spot.spot_id} ({spot.name!r}) has no walk node within "
                    f"{SNAP_TOLERANCE_M:.0f} m (nearest is {offset:.0f} m)"
                )
            self.snap_node.append(int(idx))
            self.snap_offset_m.append(offset)

    def matrix(self) -> WalkMatrix:
        """All-pairs spot walking matrix via one single-source run per spot."""
        sources = self.snap_node
        dist_nodes = dijkstra(self._dist_csr, directed=True, indices=sources)
        dist = dist_nodes[:, sources]
        offs = np.array(self.snap_offset_m)
        dist = dist + offs[:, None] + offs[None, :]
        np.fill_diagonal(dist, 0.0)

        if self._has_dura_overrides:
            dura_nodes = dijkstra(self._dura_csr, directed=True, indices=sources)
            dura = dura_nodes[:, sources]
            snap_s = offs / self.walk_speed_mps
            dura = dura + snap_s[:, None] + snap_s[None, :]
        else:
            dura = dist / self.walk_speed_mps
        np.fill_diagonal(dura, 0.0)
        return WalkMatrix(
            [s.spot_id for s in self.spots],
            dist,
            dura,
            {s.spot_id: s.order_count for s in self.spots},
        )

    def path(self, from_spot: int, to_spot: int) -> list[GeoPoint]:
        """Shortest-distance walking polyline between two spots (for exports)."""
        ids = {s.spot_id: i for i, s in enumerate(self.spots)}
        a, b = ids[from_spot], ids[to_spot]
        src, dst = self.snap_node[a], self.snap_node[b]
        _, pred = dijkstra(
            self._dist_csr, directed=True, indices=src, return_predecessors=True
        )
        if src != dst and pred[dst] < 0:
            return []
        chain = [dst]
        while chain[-1] != src:
            chain.append(int(pred[chain[-1]]))
        chain.reverse()
        pts = [self.spots[a].location]
        pts.extend(self.network.nodes[self._node_ids[i]] for i in chain)
        pts.append(self.spots[b].location)
        return pts


def walk_shortest(
    network: RoadNetwork,
    spots: list[DropOffSpot],
    walk_speed_mps: float = DEFAULT_WALK_SPEED_MPS,
) -> WalkMatrix:
    """Build the spot-to-spot WalkMatrix (see WalkGraph for the machinery)."""
    return WalkGraph(network, spots, walk_speed_mps).matrix()


def _centroid(points: list[GeoPoint]) -> GeoPoint:
    lat = sum(p.lat for p in points) / len(points)
    lon = sum(p.lon for p in points) / len(points)
    return GeoPoint(lat, lon)
