"""Regional clustering within a travel direction.

Members of a region must be pairwise within a walking-distance threshold
(default 1000 m), so one stop can serve the whole region on foot. Finding the
largest such set is a maximum-clique problem; we use a deterministic greedy
construction instead: for every remaining spot as seed, grow a set by
scanning the others in ascending walk distance from the seed, admitting a
spot only if it stays within the threshold of every current member. The
largest set wins (ties: larger order total, then smaller seed id), its
members are removed, and the process repeats until no spots remain.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .network import WalkMatrix

DEFAULT_THRESHOLD_M = 1000.0


@dataclass
class RegionalCluster:
    direction_id: int
    region_id: int
    member_spot_ids: list[int]
    order_total: int
    seed_spot_id: int


def greedy_seed_set(
    seed: int,
    available: list[int],
    walk: WalkMatrix,
    threshold_m: float,
) -> list[int]:
    """Grow the seed's pairwise-feasible set by the nearest-first scan rule."""
    others = [s for s in available if s != seed]
    others.sort(key=lambda s: (walk.dist(seed, s), s))
    members = [seed]
    member_rows = [walk.index_of(seed)]
    d = walk.dist_m
    for cand in others:
        ci = walk.index_of(cand)
        ok = True
        for mi in member_rows:
            if d[ci, mi] > threshold_m or d[mi, ci] > threshold_m:
                ok = False
                break
        if ok:
            members.append(cand)
            member_rows.append(ci)
    return members


def greedy_regions(
    spot_ids: list[int],
    walk: WalkMatrix,
    weights: dict[int, int],
    threshold_m: float = DEFAULT_THRESHOLD_M,
    direction_id: int = 0,
) -> list[RegionalCluster]:
    """Partition spot_ids into regions, largest greedy set first.

    Deterministic: candidate scan order is (distance, spot_id); the winning
    seed is chosen by (most members, largest order total, smallest seed id).
    Isolated spots (+inf distances) end up as singleton regions.
    """
    if not spot_ids:
        raise ValidationError("greedy_regions requires at least one spot")
    remaining = sorted(spot_ids)
    regions: list[RegionalCluster] = []
    while remaining:
        best: tuple[int, int, int] | None = None  # (-size, -order_total, seed)
        best_members: list[int] = []
        for seed in remaining:
            members = greedy_seed_set(seed, remaining, walk, threshold_m)
            order_total = sum(weights[s] for s in members)
            key = (-len(members), -order_total, seed)
            if best is None or key < best:
                best = key
                best_members = members
        seed = best[2] if best else remaining[0]
        regions.append(
            RegionalCluster(
                direction_id=direction_id,
                region_id=len(regions),
                member_spot_ids=list(best_members),
                order_total=sum(weights[s] for s in best_members),
                seed_spot_id=seed,
            )
        )
        kept = set(best_members)
        remaining = [s for s in remaining if s not in kept]
    return regions


def max_pairwise_distance(region: RegionalCluster, walk: WalkMatrix) -> float:
    """Largest walk distance over ordered member pairs (diagnostics/tests)."""
    idx = [walk.index_of(s) for s in region.member_spot_ids]
    if len(idx) < 2:
        return 0.0
    sub = walk.dist_m[np.ix_(idx, idx)]
    return float(sub.max())
