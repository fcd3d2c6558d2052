"""Per-stop reachability metrics within a regional cluster.

Every metric is demand-weighted by order counts. The candidate's own orders
count as distance 0 by default (its residents board at their door); the
exclude-self mode exists for sensitivity checks. Candidates that cannot
reach some members on foot get +inf averages and rank last.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

from .errors import ValidationError
from .network import WalkMatrix
from .regions import RegionalCluster
from .trips import DropOffSpot

DEFAULT_REACH_BUCKETS_M = (200.0, 400.0, 600.0, 800.0, 1000.0)

COST_METRICS = ("avg_dist", "avg_dura", "dist_cost")


@dataclass
class StopMetrics:
    spot_id: int
    avg_dist: float
    avg_dura: float
    reach: dict[float, float]
    dist_cost: float
    total_weight: int
    # integer numerators behind the reach ratios; kept so algebraic
    # identities between include/exclude-self modes stay exact
    reach_counts: dict[float, int] = field(default_factory=dict)


def stop_metrics(
    candidate: int,
    region: RegionalCluster,
    walk: WalkMatrix,
    buckets: tuple[float, ...] = DEFAULT_REACH_BUCKETS_M,
    include_self: bool = True,
) -> StopMetrics:
    """Weighted walking metrics from one candidate stop to its region.

    dist_cost and the averages come from a single accumulation, so
    avg_dist == dist_cost / total_weight holds exactly.
    """
    if candidate not in region.member_spot_ids:
        raise ValidationError(f"candidate {candidate} is not a member of region {region.region_id}")
    weights = _region_weights(region, walk)

    dist_terms: list[float] = []
    dura_terms: list[float] = []
    total_w = 0
    reach_counts = {b: 0 for b in buckets}
    for member in region.member_spot_ids:
        if member == candidate and not include_self:
            continue
        w = weights[member]
        d = walk.dist(candidate, member)
        u = walk.dura(candidate, member)
        total_w += w
        dist_terms.append(w * d)
        dura_terms.append(w * u)
        for b in buckets:
            if d <= b:
                reach_counts[b] += w
    if total_w == 0:
        raise ValidationError("exclude-self on a singleton region leaves no demand")

    dist_cost = math.fsum(dist_terms)
    dura_cost = math.fsum(dura_terms)
    return StopMetrics(
        spot_id=candidate,
        avg_dist=dist_cost / total_w,
        avg_dura=dura_cost / total_w,
        reach={b: reach_counts[b] / total_w for b in buckets},
        dist_cost=dist_cost,
        total_weight=total_w,
        reach_counts=reach_counts,
    )


def recommend_stop(region: RegionalCluster, walk: WalkMatrix, include_self: bool = True) -> int:
    """Default stop: the member minimizing avg_dist (ties: larger order count,
    then smaller spot id)."""
    weights = _region_weights(region, walk)
    best_id = None
    best_key = None
    for sid in region.member_spot_ids:
        m = stop_metrics(sid, region, walk, include_self=include_self)
        key = (m.avg_dist, -weights[sid], sid)
        if best_key is None or key < best_key:
            best_key = key
            best_id = sid
    assert best_id is not None
    return best_id


def rank_stops(
    region: RegionalCluster,
    walk: WalkMatrix,
    metric_key: str,
    buckets: tuple[float, ...] = DEFAULT_REACH_BUCKETS_M,
    include_self: bool = True,
) -> list[tuple[int, StopMetrics]]:
    """Rank every member as a candidate stop by one metric.

    Cost-like metrics sort ascending, reach buckets descending; ties are
    stable by spot id.
    """
    reach_bucket = _parse_reach_key(metric_key, buckets)
    if reach_bucket is None and metric_key not in COST_METRICS:
        raise ValidationError(
            f"unknown metric {metric_key!r}; expected one of {COST_METRICS} or reach<bucket>"
        )
    scored = [
        (sid, stop_metrics(sid, region, walk, buckets, include_self))
        for sid in region.member_spot_ids
    ]
    if reach_bucket is not None:
        scored.sort(key=lambda sm: (-sm[1].reach[reach_bucket], sm[0]))
    else:
        scored.sort(key=lambda sm: (getattr(sm[1], metric_key), sm[0]))
    return scored


def _parse_reach_key(metric_key: str, buckets: tuple[float, ...]) -> float | None:
    if not metric_key.startswith("reach"):
        return None
    try:
        bucket = float(metric_key[len("reach"):])
    except ValueError:
        raise ValidationError(f"malformed reach metric {metric_key!r}") from None
    if bucket not in buckets:
        raise ValidationError(f"reach bucket {bucket:g} not computed (have {buckets})")
    return bucket


def _region_weights(region: RegionalCluster, walk: WalkMatrix) -> dict[int, int]:
    return {sid: walk.order_counts[sid] for sid in region.member_spot_ids}


def metrics_table_csv(
    regions: list[RegionalCluster],
    walk: WalkMatrix,
    spots: dict[int, DropOffSpot],
    buckets: tuple[float, ...] = DEFAULT_REACH_BUCKETS_M,
) -> str:
    """CSV of every member's metrics over all regions (export surface)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = ["region_id", "spot_id", "name", "avg_dist_m", "avg_dura_s"]
    header += [f"reach{int(b)}" for b in buckets]
    header += ["dist_cost"]
    writer.writerow(header)
    for region in regions:
        for sid, m in rank_stops(region, walk, "avg_dist", buckets):
            row = [
                region.region_id,
                sid,
                spots[sid].name,
                f"{m.avg_dist:.3f}" if math.isfinite(m.avg_dist) else "inf",
                f"{m.avg_dura:.3f}" if math.isfinite(m.avg_dura) else "inf",
            ]
            row += [f"{m.reach[b]:.6f}" for b in buckets]
            row += [f"{m.dist_cost:.3f}" if math.isfinite(m.dist_cost) else "inf"]
            writer.writerow(row)
    return buf.getvalue()
