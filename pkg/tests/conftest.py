"""Shared fixtures: hand-sized geometries and one generated dataset."""

from __future__ import annotations

import numpy as np
import pytest

from shuttleplan.geo import GeoPoint, destination_point
from shuttleplan.network import WalkMatrix
from shuttleplan.regions import RegionalCluster
from shuttleplan.trips import DropOffSpot

WORKPLACE = GeoPoint(22.54, 114.05)


def spots_at_bearings(bearings, dist_m=4000.0, order_counts=None, workplace=WORKPLACE):
    """Spots placed on given bearings from the workplace."""
    counts = order_counts or [1] * len(bearings)
    out = []
    for i, (b, w) in enumerate(zip(bearings, counts)):
        d = dist_m[i] if isinstance(dist_m, (list, tuple)) else dist_m
        out.append(
            DropOffSpot(
                spot_id=i,
                location=destination_point(workplace, float(b), float(d)),
                name=f"spot-{i:03d}",
                order_count=w,
            )
        )
    return out


def matrix_from_distances(dist, order_counts=None, walk_speed=1.2):
    """WalkMatrix from an explicit distance array (durations = dist / speed)."""
    d = np.asarray(dist, dtype=float)
    n = d.shape[0]
    counts = order_counts or [1] * n
    return WalkMatrix(
        spot_ids=list(range(n)),
        dist_m=d,
        dura_s=np.where(np.isinf(d), np.inf, d / walk_speed),
        order_counts={i: counts[i] for i in range(n)},
    )


def region_of(member_ids, weights, direction_id=0, region_id=0, seed=None):
    return RegionalCluster(
        direction_id=direction_id,
        region_id=region_id,
        member_spot_ids=list(member_ids),
        order_total=sum(weights[m] for m in member_ids),
        seed_spot_id=seed if seed is not None else member_ids[0],
    )


@pytest.fixture(scope="session")
def small_dataset():
    """One shared synthetic dataset: 4 directions, planted congestion."""
    from shuttleplan.synthetic import CongestionStep, SyntheticSpec, generate_synthetic

    spec = SyntheticSpec(
        directions=4,
        spots_per_direction=3,
        orders_per_spot=15,
        congestion=[CongestionStep("00:00", 1.18, 1.30), CongestionStep("21:55", 1.0, 1.0)],
    )
    return generate_synthetic(spec, seed=7)
