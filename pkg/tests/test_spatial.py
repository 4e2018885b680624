import math
import random

import pytest

from edrp import build_kdtree, nearest_cp, st_dbscan
from edrp.errors import ConfigError
from edrp.instance import Location
from helpers import cp, delivery
from reference import brute_force_nearest, naive_st_dbscan_partition


def test_singleton_tree():
    tree = build_kdtree([cp("c1", 5.0, 5.0, cost=0.5)])
    assert len(tree) == 1
    assert nearest_cp(tree, Location(-100.0, 40.0)).id == "c1"


def test_cost_dimension_discriminates_colocated_cps():
    tree = build_kdtree(
        [cp("c_pricy", 2.0, 2.0, cost=0.6), cp("c_cheap", 2.0, 2.0, cost=0.4)]
    )
    # query cost pins to the minimum unit cost, so the cheap one is closer
    assert nearest_cp(tree, Location(2.0, 2.0)).id == "c_cheap"


def test_normalization_bounds():
    rng = random.Random(3)
    cps = [
        cp(f"c{i}", rng.uniform(-50, 50), rng.uniform(0, 9), cost=rng.uniform(0.4, 0.6))
        for i in range(100)
    ]
    tree = build_kdtree(cps)
    assert len(tree) == 100
    for p in tree.normalized_points():
        assert all(0.0 <= v <= 1.0 for v in p)


def test_degenerate_dimension_normalizes_to_zero():
    cps = [cp("c1", 1.0, 7.0, cost=0.5), cp("c2", 2.0, 7.0, cost=0.5)]
    tree = build_kdtree(cps)
    for p in tree.normalized_points():
        assert p[1] == 0.0 and p[2] == 0.0


def test_tie_breaks_toward_smaller_id():
    cps = [cp("cb", 1.0, 0.0, cost=0.5), cp("ca", -1.0, 0.0, cost=0.5)]
    tree = build_kdtree(cps)
    assert nearest_cp(tree, Location(0.0, 0.0)).id == "ca"


def test_nearest_matches_linear_scan():
    rng = random.Random(17)
    for trial in range(25):
        n = rng.randint(1, 60)
        cps = [
            cp(
                f"c{i}",
                rng.uniform(0, 30),
                rng.uniform(0, 30),
                cost=rng.uniform(0.3, 0.7),
            )
            for i in range(n)
        ]
        tree = build_kdtree(cps)
        for _ in range(40):
            q = (rng.uniform(-5, 35), rng.uniform(-5, 35))
            got = nearest_cp(tree, Location(*q))
            want = brute_force_nearest(cps, q)
            assert got.id == want.id, (trial, q)


# ---------------------------------------------------------------------------
# Spatio-temporal clustering


def _cluster_ids(clusters):
    return {frozenset(c.members) for c in clusters}


def test_single_dense_blob():
    deliveries = [delivery(f"d{i}", 5.0, 5.0, 0.0, 100.0) for i in range(1, 6)]
    clusters = st_dbscan(deliveries, eps_spatial=1.0, eps_temporal=1.0, min_pts=1)
    assert len(clusters) == 1
    assert set(clusters[0].members) == {d.id for d in deliveries}


def test_two_distant_groups():
    left = [delivery(f"d{i}", 0.0 + i * 0.1, 0.0, 0.0, 100.0) for i in range(1, 4)]
    right = [delivery(f"d{i}", 500.0 + i * 0.1, 0.0, 0.0, 100.0) for i in range(4, 7)]
    clusters = st_dbscan(left + right, eps_spatial=5.0, eps_temporal=50.0, min_pts=2)
    assert len(clusters) == 2
    assert _cluster_ids(clusters) == {
        frozenset({"d1", "d2", "d3"}),
        frozenset({"d4", "d5", "d6"}),
    }


def test_temporal_split_overrides_spatial_closeness():
    early = [delivery(f"d{i}", 1.0, 1.0, 0.0, 50.0) for i in range(1, 4)]
    late = [delivery(f"d{i}", 1.0, 1.0, 0.0, 400.0) for i in range(4, 7)]
    clusters = st_dbscan(early + late, eps_spatial=5.0, eps_temporal=30.0, min_pts=2)
    assert len(clusters) == 2


def test_noise_points_become_singletons():
    blob = [delivery(f"d{i}", 0.0, 0.0, 0.0, 100.0) for i in range(1, 4)]
    loner = delivery("d9", 50.0, 50.0, 0.0, 100.0)
    clusters = st_dbscan(blob + [loner], eps_spatial=2.0, eps_temporal=10.0, min_pts=2)
    assert _cluster_ids(clusters) == {
        frozenset({"d1", "d2", "d3"}),
        frozenset({"d9"}),
    }


def test_partition_and_orderings():
    rng = random.Random(5)
    deliveries = [
        delivery(f"d{i:02d}", rng.uniform(0, 20), rng.uniform(0, 20), 0.0, rng.uniform(60, 600))
        for i in range(1, 31)
    ]
    clusters = st_dbscan(deliveries, eps_spatial=4.0, eps_temporal=120.0, min_pts=2)
    seen = [m for c in clusters for m in c.members]
    assert sorted(seen) == sorted(d.id for d in deliveries)  # exhaustive, disjoint
    by_id = {d.id: d for d in deliveries}
    for c in clusters:
        ends = [by_id[m].window_end for m in c.members]
        assert ends == sorted(ends)
        assert c.earliest_deadline == ends[0]
    deadlines = [c.earliest_deadline for c in clusters]
    assert deadlines == sorted(deadlines)


def test_matches_naive_reference():
    rng = random.Random(99)
    for trial in range(30):
        deliveries = [
            delivery(
                f"d{i:02d}",
                rng.uniform(0, 15),
                rng.uniform(0, 15),
                0.0,
                rng.uniform(0, 500),
            )
            for i in range(1, 31)
        ]
        eps_s = rng.uniform(1.0, 6.0)
        eps_t = rng.uniform(30.0, 200.0)
        min_pts = rng.randint(1, 4)
        got = _cluster_ids(st_dbscan(deliveries, eps_s, eps_t, min_pts))
        want = naive_st_dbscan_partition(deliveries, eps_s, eps_t, min_pts)
        assert got == want, (trial, eps_s, eps_t, min_pts)


def test_invalid_parameters():
    deliveries = [delivery("d1", 0.0, 0.0, 0.0, 100.0)]
    with pytest.raises(ConfigError):
        st_dbscan(deliveries, 0.0, 10.0, 1)
    with pytest.raises(ConfigError):
        st_dbscan(deliveries, 1.0, 10.0, 0)
    with pytest.raises(ConfigError):
        build_kdtree([])
