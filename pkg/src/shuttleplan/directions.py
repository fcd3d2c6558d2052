"""Travel-direction clustering.

Drop-off spots are clustered by their bearing from the workplace, embedded on
the unit circle as (cos theta, sin theta) so wraparound behaves (1 degree and
359 degrees are close). Points are weighted by order count by default: a
complex generating 80 trips pulls a direction centroid harder than one
generating 2. The silhouette-vs-k curve and per-direction angle box-plot
statistics are decision support; the planner picks the final k.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .geo import GeoPoint, bearing_deg
from .trips import DropOffSpot

MAX_LLOYD_ITERATIONS = 300


@dataclass
class DirectionalClustering:
    k: int
    assignment: dict[int, int]
    centroids: list[float]
    seed: int


@dataclass(frozen=True)
class SilhouettePoint:
    k: int
    silhouette: float


@dataclass
class SilhouetteCurve:
    points: list[SilhouettePoint]
    best_k: int


@dataclass(frozen=True)
class AngleStats:
    direction_id: int
    min: float
    q1: float
    median: float
    q3: float
    max: float
    n: int
    order_total: int


def spot_bearings(spots: list[DropOffSpot], workplace: GeoPoint) -> np.ndarray:
    return np.array([bearing_deg(workplace, s.location) for s in spots])


def _embed(bearings: np.ndarray) -> np.ndarray:
    theta = np.radians(bearings)
    return np.column_stack([np.cos(theta), np.sin(theta)])


def _weights(spots: list[DropOffSpot], weighted: bool) -> np.ndarray:
    if weighted:
        return np.array([float(s.order_count) for s in spots])
    return np.ones(len(spots))


def _kmeanspp_init(points: np.ndarray, weights: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """Weighted k-means++ seeding: first center by weight, then weight * D^2."""
    n = len(points)
    centers = np.empty((k, 2))
    probs = weights / weights.sum()
    first = int(rng.choice(n, p=probs))
    centers[0] = points[first]
    d2 = np.sum((points - centers[0]) ** 2, axis=1)
    for c in range(1, k):
        scores = weights * d2
        total = scores.sum()
        if total <= 0:
            # all remaining mass sits on already-chosen points; fall back to
            # the first indices not yet used as centers
            chosen = {tuple(centers[i]) for i in range(c)}
            idx = next(
                (i for i in range(n) if tuple(points[i]) not in chosen),
                int(rng.integers(n)),
            )
        else:
            idx = int(rng.choice(n, p=scores / total))
        centers[c] = points[idx]
        d2 = np.minimum(d2, np.sum((points - centers[c]) ** 2, axis=1))
    return centers


def _assign(points: np.ndarray, centers: np.ndarray) -> np.ndarray:
    # ties go to the lowest cluster index (argmin behavior), keeping runs
    # deterministic
    d2 = np.sum((points[:, None, :] - centers[None, :, :]) ** 2, axis=2)
    return np.argmin(d2, axis=1)


def cluster_directions(
    spots: list[DropOffSpot],
    workplace: GeoPoint,
    k: int,
    seed: int,
    weighted: bool = True,
) -> DirectionalClustering:
    """Weighted Lloyd K-means on the bearing embedding, deterministic per seed.

    Empty clusters are repaired by stealing the point currently farthest from
    its own centroid. Direction ids are relabeled by ascending centroid angle
    so equal runs produce identical, presentable ids.
    """
    if k < 1:
        raise ValidationError("k must be >= 1")
    if k > len(spots):
        raise ValidationError(f"k = {k} exceeds number of spots ({len(spots)})")
    bearings = spot_bearings(spots, workplace)
    points = _embed(bearings)
    weights = _weights(spots, weighted)
    rng = np.random.default_rng(seed)

    centers = _kmeanspp_init(points, weights, k, rng)
    labels = _assign(points, centers)
    for _ in range(MAX_LLOYD_ITERATIONS):
        labels = _repair_empty(points, labels, centers, k)
        for c in range(k):
            mask = labels == c
            w = weights[mask]
            centers[c] = (points[mask] * w[:, None]).sum(axis=0) / w.sum()
        new_labels = _assign(points, centers)
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
    labels = _repair_empty(points, labels, centers, k)

    # circular mean of members = angle of the weighted embedding mean
    angles = np.empty(k)
    for c in range(k):
        mask = labels == c
        w = weights[mask]
        mean = (points[mask] * w[:, None]).sum(axis=0) / w.sum()
        angles[c] = math.degrees(math.atan2(mean[1], mean[0])) % 360.0

    order = np.argsort(angles, kind="stable")
    relabel = {int(old): new for new, old in enumerate(order)}
    assignment = {s.spot_id: relabel[int(labels[i])] for i, s in enumerate(spots)}
    centroids = [float(angles[old]) for old in order]
    return DirectionalClustering(k=k, assignment=assignment, centroids=centroids, seed=seed)


def _repair_empty(points: np.ndarray, labels: np.ndarray, centers: np.ndarray, k: int) -> np.ndarray:
    labels = labels.copy()
    for c in range(k):
        if np.any(labels == c):
            continue
        dist = np.sum((points - centers[labels]) ** 2, axis=1)
        # only steal from clusters that keep at least one member
        counts = np.bincount(labels, minlength=k)
        dist[counts[labels] <= 1] = -np.inf
        victim = int(np.argmax(dist))
        labels[victim] = c
        centers[c] = points[victim]
    return labels


def silhouette(
    clustering: DirectionalClustering,
    spots: list[DropOffSpot],
    workplace: GeoPoint,
    weighted: bool = True,
) -> float:
    """Weighted mean silhouette over the bearing embedding.

    Per point: (b - a) / max(a, b) with a the weighted mean distance to the
    rest of its own cluster and b the smallest weighted mean distance to any
    other cluster. Points in singleton clusters contribute 0, as does the
    degenerate a == b == 0 case.
    """
    if clustering.k < 2:
        raise ValidationError("silhouette undefined for k < 2")
    points = _embed(spot_bearings(spots, workplace))
    weights = _weights(spots, weighted)
    labels = np.array([clustering.assignment[s.spot_id] for s in spots])
    n = len(spots)
    dist = np.sqrt(np.maximum(0.0, np.sum((points[:, None, :] - points[None, :, :]) ** 2, axis=2)))

    cluster_w = np.array([weights[labels == c].sum() for c in range(clustering.k)])
    # weighted distance mass from each point to each cluster
    mass = np.zeros((n, clustering.k))
    for c in range(clustering.k):
        mask = labels == c
        mass[:, c] = dist[:, mask] @ weights[mask]

    scores = np.zeros(n)
    for i in range(n):
        c = labels[i]
        own_w = cluster_w[c] - weights[i]
        if own_w <= 0:
            continue  # singleton cluster -> 0
        a = mass[i, c] / own_w  # self-distance is 0, excluded via weight
        b = np.inf
        for other in range(clustering.k):
            if other == c:
                continue
            b = min(b, mass[i, other] / cluster_w[other])
        m = max(a, b)
        scores[i] = 0.0 if m == 0 else (b - a) / m
    return float((scores * weights).sum() / weights.sum())


def silhouette_curve(
    spots: list[DropOffSpot],
    workplace: GeoPoint,
    k_range: tuple[int, int],
    seed: int,
    weighted: bool = True,
) -> SilhouetteCurve:
    """Silhouette at every k in [k_min, k_max], plus the argmax (ties -> smallest k).

    Advisory only: the curve often peaks at a k the planner rejects for
    practical reasons, so the chosen k lives on the session, not here.
    """
    k_min, k_max = k_range
    if not (2 <= k_min <= k_max <= len(spots) - 1):
        raise ValidationError(
            f"k range [{k_min}, {k_max}] invalid for {len(spots)} spots "
            "(need 2 <= k_min <= k_max <= spots - 1)"
        )
    points: list[SilhouettePoint] = []
    best_k, best_val = k_min, -math.inf
    for k in range(k_min, k_max + 1):
        clustering = cluster_directions(spots, workplace, k, seed, weighted)
        val = silhouette(clustering, spots, workplace, weighted)
        points.append(SilhouettePoint(k, val))
        if val > best_val:
            best_k, best_val = k, val
    return SilhouetteCurve(points, best_k)


def angle_stats(
    clustering: DirectionalClustering,
    spots: list[DropOffSpot],
    workplace: GeoPoint,
) -> list[AngleStats]:
    """Five-number summaries of member bearings per direction.

    Bearings are unwrapped into (centroid - 180, centroid + 180] before the
    quantiles so a cluster straddling north does not explode; quantiles use
    linear interpolation, making the box plots bit-reproducible.
    """
    bearings = spot_bearings(spots, workplace)
    out: list[AngleStats] = []
    for d in range(clustering.k):
        member_idx = [i for i, s in enumerate(spots) if clustering.assignment[s.spot_id] == d]
        center = clustering.centroids[d]
        vals = np.array([_unwrap(bearings[i], center) for i in member_idx])
        q = np.percentile(vals, [0, 25, 50, 75, 100], method="linear")
        out.append(
            AngleStats(
                direction_id=d,
                min=float(q[0]),
                q1=float(q[1]),
                median=float(q[2]),
                q3=float(q[3]),
                max=float(q[4]),
                n=len(member_idx),
                order_total=sum(spots[i].order_count for i in member_idx),
            )
        )
    return out


def _unwrap(bearing: float, center: float) -> float:
    return (bearing - center + 180.0) % 360.0 - 180.0 + center
