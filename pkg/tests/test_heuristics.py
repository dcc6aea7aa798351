import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.sparse.csgraph import minimum_spanning_tree
from scipy.spatial.distance import cdist

from ktour import Instance, InvariantError, bounds, cover_heuristic, exact_ktc, held_karp_tsp, itp, mst_tsp_tour
from ktour import heuristics
from ktour.heuristics import (
    GuaranteeLog,
    TspTour,
    _prim_edges,
    closed_length,
    euclidean_mst_edges,
    mst_weight,
    partition_at_offset,
)
from ktour.model import radial_cost, tour_cost, validate

from .conftest import instances, oracle_corpus


def brute_itp(instance, order):
    """Reference: try every offset by building the tours explicitly."""
    k = instance.k
    best = math.inf
    for off in range(min(k, len(order))):
        pieces = [order[:off]] if off else []
        pieces += [order[s:s + k] for s in range(off, len(order), k)]
        best = min(best, sum(tour_cost(instance, p) for p in pieces if len(p)))
    return best


def mst_weight_dense(xy):
    return float(minimum_spanning_tree(cdist(xy, xy)).sum())


class TestMstTour:
    def test_single_point(self):
        t = mst_tsp_tour(Instance.from_points([(1, 0)], 1))
        assert t.order.tolist() == [0] and t.length == 2.0

    def test_collinear(self):
        t = mst_tsp_tour(Instance.from_points([(3, 0), (1, 0), (2, 0)], 1))
        assert t.length == pytest.approx(6.0)

    def test_empty(self):
        t = mst_tsp_tour(Instance.from_points([], 1))
        assert t.order.size == 0 and t.length == 0.0

    def test_within_twice_optimal_tour(self):
        rng = np.random.default_rng(42)
        i = Instance.from_points(rng.uniform(-1, 1, (8, 2)), 1)
        assert mst_tsp_tour(i).length <= 2 * held_karp_tsp(i).length + 1e-9

    @given(instances(min_n=1, max_n=9, max_k=1))
    def test_two_approximation(self, instance):
        tour = mst_tsp_tour(instance)
        assert sorted(tour.order.tolist()) == list(range(instance.n))
        assert tour.length <= 2 * held_karp_tsp(instance).length * (1 + 1e-9) + 1e-9

    def test_duplicates_and_depot_coincident(self):
        i = Instance.from_points([(0, 0), (1, 1), (1, 1), (0, 0)], 2)
        t = mst_tsp_tour(i)
        assert sorted(t.order.tolist()) == [0, 1, 2, 3]
        assert t.length == pytest.approx(2 * math.sqrt(2))

    def test_deterministic(self):
        rng = np.random.default_rng(1)
        i = Instance.from_points(rng.normal(size=(300, 2)), 4)
        assert mst_tsp_tour(i).order.tolist() == mst_tsp_tour(i).order.tolist()


class TestMstEdges:
    @pytest.mark.parametrize("n", [5, 50, 700, 2000])
    def test_weight_matches_dense_mst(self, n):
        xy = np.random.default_rng(n).uniform(-1, 1, (n, 2))
        e = np.asarray(euclidean_mst_edges(xy))
        assert len(e) == n - 1
        w = np.hypot(*(xy[e[:, 0]] - xy[e[:, 1]]).T).sum()
        assert w == pytest.approx(mst_weight_dense(xy), rel=1e-12)

    def test_large_collinear(self):
        x = np.random.default_rng(3).permutation(1000).astype(float)
        xy = np.column_stack([x, 2 * x + 1])
        e = np.asarray(euclidean_mst_edges(xy))
        w = np.hypot(*(xy[e[:, 0]] - xy[e[:, 1]]).T).sum()
        assert w == pytest.approx(999 * math.sqrt(5))

    def test_prim_agrees_with_delaunay(self):
        xy = np.random.default_rng(9).normal(size=(650, 2))
        e = np.asarray(_prim_edges(xy))
        w = np.hypot(*(xy[e[:, 0]] - xy[e[:, 1]]).T).sum()
        assert w == pytest.approx(mst_weight_dense(xy), rel=1e-12)


class TestItp:
    def test_collinear_four_points(self):
        i = Instance.from_points([(1, 0), (2, 0), (3, 0), (4, 0)], 2)
        tour = TspTour(np.arange(4), 8.0)
        sol = itp(i, tour)
        # the two offsets cost 12 and 16
        assert brute_itp(i, list(range(4))) == pytest.approx(12.0)
        assert sol.cost == pytest.approx(12.0)
        assert sol.tours == ((0, 1), (2, 3))
        assert sol.cost <= 0.5 * 8 + radial_cost(i)

    def test_two_points_capacity_two(self):
        i = Instance.from_points([(1, 0), (0, 1)], 2)
        sol = cover_heuristic(i)
        assert sol.tours in (((0, 1),), ((1, 0),))

    def test_k_one_is_radial(self):
        i = Instance.from_points([(1, 0), (0, 3), (-2, 0)], 1)
        assert cover_heuristic(i).cost == pytest.approx(radial_cost(i))

    def test_empty(self):
        sol = cover_heuristic(Instance.from_points([], 3))
        assert sol.tours == () and sol.cost == 0.0

    def test_rejects_non_permutation(self):
        i = Instance.from_points([(1, 0), (2, 0)], 2)
        with pytest.raises(ValueError):
            itp(i, TspTour(np.array([0, 0]), 4.0))

    def test_rejects_false_length(self, monkeypatch):
        # an understated tour length makes the guarantee impossible to meet;
        # a private log keeps the deliberate violation out of the session counter
        log = GuaranteeLog()
        monkeypatch.setattr(heuristics, "itp_log", log)
        i = Instance.from_points([(1, 0), (-1, 0), (0, 5)], 3)
        with pytest.raises(InvariantError):
            itp(i, TspTour(np.arange(3), 0.1))
        assert (log.checks, log.violations) == (1, 1)

    def test_divisible_offset_zero_has_full_tours(self):
        i = Instance.from_points(np.random.default_rng(5).normal(size=(12, 2)), 3)
        tours = partition_at_offset(mst_tsp_tour(i).order, 3, 0)
        assert [len(t) for t in tours] == [3, 3, 3, 3]

    @given(instances(min_n=1, max_n=25, max_k=6), st.data())
    def test_matches_brute_offsets_for_any_tour(self, instance, data):
        order = data.draw(st.permutations(list(range(instance.n))))
        tour = TspTour(np.array(order), closed_length(instance, order))
        sol = itp(instance, tour)
        assert sol.cost == pytest.approx(brute_itp(instance, order), rel=1e-9, abs=1e-9)
        assert validate(instance, sol) == []

    @given(instances(min_n=1, max_n=40, max_k=8))
    def test_length_guarantee(self, instance):
        tour = mst_tsp_tour(instance)
        sol = itp(instance, tour)
        bound = (1 - 1 / instance.k) * tour.length + radial_cost(instance)
        assert sol.cost <= bound + 1e-9 * max(1, bound)

    @given(instances(min_n=1, max_n=30, max_k=6))
    def test_valid_and_deterministic(self, instance):
        a, b = cover_heuristic(instance), cover_heuristic(instance)
        assert a.tours == b.tours
        assert validate(instance, a) == []

    def test_tight_approximation_on_corpus(self):
        for i in oracle_corpus(40, n_max=9, seed=11):
            assert cover_heuristic(i).cost <= (3 - 2 / i.k) * exact_ktc(i).cost + 1e-9


class TestBounds:
    def test_sandwich_on_corpus(self):
        for i in oracle_corpus(40, n_max=8, seed=4):
            b, opt = bounds(i), exact_ktc(i).cost
            assert b.radial <= b.opt_lower + 1e-12
            assert b.opt_lower <= opt + 1e-9 <= b.opt_upper + 2e-9

    def test_mst_weight_includes_depot(self):
        assert mst_weight(Instance.from_points([(3, 4)], 1)) == pytest.approx(5.0)

    def test_brute_force_reference_small(self):
        # the heuristic is never better than the best partition of any order
        i = Instance.from_points([(1, 0), (0, 1), (-1, 0), (0, -1), (2, 2)], 2)
        best = min(brute_itp(i, list(p)) for p in itertools.permutations(range(5)))
        assert exact_ktc(i).cost <= best + 1e-9 <= cover_heuristic(i).cost + 2e-9
