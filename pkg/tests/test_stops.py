"""Stop-metric algebra and the divergent-ranking fixture.

The two-candidate fixture is constructed so that candidate X wins on
avg_dist (768 m) while candidate Y wins on avg_dura (9.65 min vs 12.94) and
reach800 (93% vs 76%): short-distance paths can still be slow (footbridges),
so the metrics may rank candidates differently. Note such a region cannot
satisfy a strict pairwise-1000 m bound (820 m average with 93% inside 800 m
forces some walks beyond 1000 m); stop_metrics takes the region as given.
"""

import math

import numpy as np
import pytest

from shuttleplan.errors import ValidationError
from shuttleplan.stops import metrics_table_csv, rank_stops, recommend_stop, stop_metrics
from shuttleplan.trips import DropOffSpot

from conftest import matrix_from_distances, region_of

# ids: 0=X, 1=Y, 2=C (far from X), 3=E (far from Y), 4=A (filler)
WEIGHTS = [9, 20, 24, 7, 40]

DIST = [
    [0, 700, 1456.25, 550, 600],
    [700, 0, 700, 4500, 685],
    [1456.25, 700, 0, 900, 750],
    [550, 4500, 900, 0, 620],
    [600, 685, 750, 620, 0],
]
DURA = [
    [0, 800, 1600, 600, 476],
    [800, 0, 500, 2500, 530],
    [1600, 500, 0, 1000, 700],
    [600, 2500, 1000, 0, 640],
    [476, 530, 700, 640, 0],
]


def paper_style_region():
    walk = matrix_from_distances(DIST, order_counts=WEIGHTS)
    walk.dura_s = np.array(DURA, dtype=float)
    weights = {i: WEIGHTS[i] for i in range(5)}
    return region_of([0, 1, 2, 3, 4], weights), walk


def test_singleton_region_all_trivial():
    walk = matrix_from_distances([[0.0]], order_counts=[5])
    region = region_of([0], {0: 5})
    m = stop_metrics(0, region, walk)
    assert m.avg_dist == 0.0
    assert m.avg_dura == 0.0
    assert m.dist_cost == 0.0
    assert all(v == 1.0 for v in m.reach.values())


def test_documented_weighted_example():
    # candidate w=1 plus members at 100 m (w=2) and 400 m (w=1)
    dist = [[0, 100, 400], [100, 0, 300], [400, 300, 0]]
    walk = matrix_from_distances(dist, order_counts=[1, 2, 1])
    region = region_of([0, 1, 2], {0: 1, 1: 2, 2: 1})
    m = stop_metrics(0, region, walk)
    assert m.avg_dist == pytest.approx(150.0)      # (1*0 + 2*100 + 1*400)/4
    assert m.dist_cost == pytest.approx(600.0)
    assert m.reach[200.0] == pytest.approx(3 / 4)
    assert m.reach[400.0] == 1.0
    assert m.total_weight == 4


def test_candidate_outside_region_rejected():
    walk = matrix_from_distances([[0, 100], [100, 0]])
    region = region_of([0], {0: 1})
    with pytest.raises(ValidationError):
        stop_metrics(1, region, walk)


def test_paper_style_fixture_reproduces_case_numbers():
    region, walk = paper_style_region()
    x = stop_metrics(0, region, walk)
    y = stop_metrics(1, region, walk)
    assert x.avg_dist == pytest.approx(768.0)
    assert x.avg_dura == pytest.approx(12.94 * 60.0)
    assert x.reach[800.0] == pytest.approx(0.76)
    assert y.avg_dist == pytest.approx(820.0)
    assert y.avg_dura == pytest.approx(9.65 * 60.0)
    assert y.reach[800.0] == pytest.approx(0.93)
    # metrics are independent: X wins distance, Y wins duration and coverage
    assert x.avg_dist < y.avg_dist
    assert x.avg_dura > y.avg_dura
    assert x.reach[800.0] < y.reach[800.0]


def test_rank_stops_orientation_per_metric():
    region, walk = paper_style_region()
    by_dist = [sid for sid, _ in rank_stops(region, walk, "avg_dist")]
    by_reach = [sid for sid, _ in rank_stops(region, walk, "reach800")]
    by_dura = [sid for sid, _ in rank_stops(region, walk, "avg_dura")]
    assert by_dist.index(0) < by_dist.index(1)   # X first on avg_dist
    assert by_reach.index(1) < by_reach.index(0)  # Y first on reach800
    assert by_dura.index(1) < by_dura.index(0)
    assert rank_stops(region, walk, "avg_dist")[0][0] == recommend_stop(region, walk)
    with pytest.raises(ValidationError):
        rank_stops(region, walk, "bogus")
    with pytest.raises(ValidationError):
        rank_stops(region, walk, "reach12345")


def test_recommend_middle_of_three_point_line():
    dist = [[0, 500, 1000], [500, 0, 500], [1000, 500, 0]]
    walk = matrix_from_distances(dist)
    region = region_of([0, 1, 2], {0: 1, 1: 1, 2: 1})
    assert recommend_stop(region, walk) == 1  # avg 333 beats 500


def test_recommend_tie_smaller_spot_id():
    dist = [[0, 400], [400, 0]]
    walk = matrix_from_distances(dist)
    region = region_of([0, 1], {0: 1, 1: 1})
    assert recommend_stop(region, walk) == 0


def test_recommend_tie_larger_order_count_first():
    # spots 0 and 2 tie at avg_dist 240; spot 2 carries more orders and wins
    dist = [[0, 100, 400], [100, 0, 500], [400, 500, 0]]
    walk = matrix_from_distances(dist, order_counts=[1, 4, 5])
    region = region_of([0, 1, 2], {0: 1, 1: 4, 2: 5})
    x0 = stop_metrics(0, region, walk)
    x2 = stop_metrics(2, region, walk)
    assert x0.avg_dist == x2.avg_dist == pytest.approx(240.0)
    assert recommend_stop(region, walk) == 2


def test_avg_identity_and_reach_monotone_random():
    rng = np.random.default_rng(17)
    buckets = (200.0, 400.0, 600.0, 800.0, 1000.0)
    for _ in range(50):
        n = int(rng.integers(1, 12))
        d = rng.uniform(0, 2500, size=(n, n))
        d = (d + d.T) / 2
        np.fill_diagonal(d, 0.0)
        counts = [int(c) for c in rng.integers(1, 40, size=n)]
        walk = matrix_from_distances(d, order_counts=counts)
        region = region_of(list(range(n)), {i: counts[i] for i in range(n)})
        for cand in range(n):
            m = stop_metrics(cand, region, walk, buckets)
            # same-summation identity, exact
            assert m.avg_dist == m.dist_cost / m.total_weight
            vals = [m.reach[b] for b in buckets]
            assert all(b2 >= b1 for b1, b2 in zip(vals, vals[1:]))
            assert vals[-1] <= 1.0
            if max(d[walk.index_of(cand)]) <= buckets[-1]:
                assert m.reach[buckets[-1]] == 1.0


def test_include_exclude_self_differ_by_own_weight_only():
    region, walk = paper_style_region()
    for cand in region.member_spot_ids:
        inc = stop_metrics(cand, region, walk, include_self=True)
        exc = stop_metrics(cand, region, walk, include_self=False)
        w_self = WEIGHTS[cand]
        assert inc.total_weight == exc.total_weight + w_self
        assert inc.dist_cost == exc.dist_cost  # self term is zero distance
        for b in inc.reach:
            assert inc.reach_counts[b] == exc.reach_counts[b] + w_self


def test_unreachable_member_poisons_and_ranks_last():
    inf = math.inf
    dist = [[0, 300, inf], [300, 0, inf], [inf, inf, 0]]
    walk = matrix_from_distances(dist)
    region = region_of([0, 1, 2], {0: 1, 1: 1, 2: 1})
    m2 = stop_metrics(2, region, walk)
    assert math.isinf(m2.avg_dist)
    assert m2.reach[1000.0] == pytest.approx(1 / 3)  # only its own orders
    ranked = [sid for sid, _ in rank_stops(region, walk, "avg_dist")]
    assert ranked[-1] == 2


def test_metrics_invariant_under_member_permutation():
    region, walk = paper_style_region()
    weights = {i: WEIGHTS[i] for i in range(5)}
    shuffled = region_of([4, 2, 0, 3, 1], weights)
    for cand in range(5):
        a = stop_metrics(cand, region, walk)
        b = stop_metrics(cand, shuffled, walk)
        assert a.avg_dist == b.avg_dist
        assert a.dist_cost == b.dist_cost
        assert a.reach == b.reach
    assert [s for s, _ in rank_stops(region, walk, "avg_dist")] == [
        s for s, _ in rank_stops(shuffled, walk, "avg_dist")
    ]


def test_recommendation_invariant_under_weight_scaling():
    region, walk = paper_style_region()
    base = recommend_stop(region, walk)
    scaled_counts = [w * 7 for w in WEIGHTS]
    walk_scaled = matrix_from_distances(DIST, order_counts=scaled_counts)
    walk_scaled.dura_s = np.array(DURA, dtype=float)
    region_scaled = region_of([0, 1, 2, 3, 4], {i: scaled_counts[i] for i in range(5)})
    assert recommend_stop(region_scaled, walk_scaled) == base


def test_metrics_csv_export():
    region, walk = paper_style_region()
    spots = {
        i: DropOffSpot(i, __import__("shuttleplan.geo", fromlist=["GeoPoint"]).GeoPoint(22.5, 114.0), f"s{i}", WEIGHTS[i])
        for i in range(5)
    }
    text = metrics_table_csv([region], walk, spots)
    lines = text.strip().split("\n")
    assert lines[0].startswith("region_id,spot_id,name,avg_dist_m,avg_dura_s,reach200")
    assert len(lines) == 6  # header + 5 members
