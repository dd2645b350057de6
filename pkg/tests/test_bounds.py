import itertools
import math

import pytest
from hypothesis import given, settings, strategies as st

from orleak import bounds
from orleak.algorithms import silent_convergecast
from orleak.engine import run, single_initiator
from orleak.graph import all_pairs_distance, connected_supersets, named_graph, path_graph, star_graph

from conftest import connected_graphs

STAR = star_graph(4)
P3 = path_graph(3)


def test_rcase_examples():
    assert bounds.rcase_bound(STAR, []).h_comp == 0.0
    assert bounds.rcase_bound(STAR, STAR.edges).h_comp == pytest.approx(2.0)
    leaf = bounds.rcase_bound(STAR, [(0, 1)])
    assert leaf.h_comp == pytest.approx(0.811278, abs=1e-6)
    assert sorted(leaf.sizes) == [1, 3]


def test_rcase_printed_variant_on_k2():
    rb = bounds.rcase_bound(named_graph("K2"), [(0, 1)])
    assert rb.h_comp == 1.0 and rb.printed == 0.0


@given(connected_graphs(), st.data())
def test_rcase_printed_is_complement(g, data):
    F = data.draw(st.lists(st.sampled_from(g.edges), unique=True))
    rb = bounds.rcase_bound(g, F)
    assert rb.printed + rb.h_comp == pytest.approx(math.log2(g.n), abs=1e-12)


def test_sparse_examples():
    assert bounds.sparse_bound_k(P3, 0) == 0.0
    assert bounds.sparse_bound_p(P3, 0.0) == 0.0
    assert bounds.sparse_bound_p(P3, 1.0) == pytest.approx(math.log2(3), abs=1e-12)
    # distance multiset {0 x3, 1 x4, 2 x2}
    assert bounds.sparse_bound_p(P3, 0.5) == pytest.approx(-math.log2(5.5 / 9), abs=1e-12)
    assert round(bounds.sparse_bound_p(P3, 0.5), 6) == 0.710493


def test_dense_examples():
    assert bounds.dense_bound_k(4, 6, 0) == 0.0
    assert bounds.dense_bound_k(4, 6, 1) == pytest.approx(1 / 3)
    assert bounds.dense_bound_p(4, 1.0) == 2.0
    with pytest.raises(ValueError):
        bounds.dense_bound_p(4, -0.1)


def test_sparsec_examples():
    empty = [()] * STAR.n
    for p in (0.0, 0.3, 0.5, 1.0):
        assert bounds.sparsec_bound_p(STAR, empty, p) == pytest.approx(bounds.sparse_bound_p(STAR, p))
    everything = [STAR.edges] * STAR.n
    assert bounds.sparsec_bound_p(STAR, everything, 0.5) == 0.0
    algo = silent_convergecast(STAR)
    active = [run(algo, STAR, single_initiator(4, v)).active_edges() for v in range(4)]
    assert bounds.sparsec_bound_p(STAR, active, 0.5) == pytest.approx(-math.log2(8.5 / 16))
    assert round(bounds.sparsec_bound_p(STAR, active, 0.5), 6) == 0.912537


def brute_coro(g, W, term):
    d = all_pairs_distance(g)
    total = 0.0
    for u in range(g.n):
        best = None
        for size in range(1, min(W + 1, g.n) + 1):
            for U in itertools.combinations(range(g.n), size):
                if u in U and frozenset(U) in set(connected_supersets(g, u, size)):
                    val = sum(term(min(d[x][v] for x in U)) for v in range(g.n))
                    best = val if best is None else max(best, val)
        total += best
    return max(-math.log2(total / g.n ** 2), 0.0)


def test_coro_examples():
    assert bounds.sparsec_coro_bound_p(STAR, 1, 0.5) == pytest.approx(-math.log2(12 / 16))
    assert round(bounds.sparsec_coro_bound_p(STAR, 1, 0.5), 6) == 0.415037
    assert bounds.sparsec_coro_bound_p(STAR, 3, 0.5) == 0.0
    for p in (0.25, 0.5, 1.0):
        assert bounds.sparsec_coro_bound_p(P3, 0, p) == pytest.approx(bounds.sparse_bound_p(P3, p))
    with pytest.raises(ValueError):
        bounds.sparsec_coro_bound_k(STAR, -1, 1)


@settings(max_examples=30, deadline=None)
@given(connected_graphs(max_n=5), st.integers(0, 4), st.sampled_from([0.25, 0.5, 0.75]))
def test_coro_matches_enumeration(g, W, p):
    got = bounds.sparsec_coro_bound_p(g, W, p)
    assert got == pytest.approx(brute_coro(g, W, lambda x: (1 - p) ** x), abs=1e-12)


def test_densec():
    b = bounds.densec_bound_p(4, 1, 0.5)
    assert b.hypothesis_ok and b.value == 0.5
    assert bounds.densec_bound_k(4, 6, 1, 0).value == 0.0
    assert bounds.densec_bound_k(4, 6, 2, 1).value == pytest.approx(1 / 6 * math.log2(4 / 3))
    vacuous = bounds.densec_bound_p(4, 3, 0.5)
    assert vacuous == bounds.Bound(0.0, False)


@given(connected_graphs(), st.floats(0, 1), st.floats(0, 1))
def test_monotone_in_parameters(g, p, q):
    lo, hi = sorted((p, q))
    assert bounds.sparse_bound_p(g, lo) <= bounds.sparse_bound_p(g, hi) + 1e-12
    ks = [bounds.dense_bound_k(g.n, g.m, k) for k in range(6)]
    assert ks == sorted(ks)


def test_petrov_examples():
    assert bounds.petrov_lhs([2, 2]) == 1.0
    assert bounds.petrov_rhs([2, 2], 1) == pytest.approx(2 / 3)
    assert bounds.petrov_check([2, 2], 1)
    assert bounds.petrov_rhs([5], 1) == 0.0 and bounds.petrov_check([5], 1)
    assert bounds.petrov_rhs([1, 1, 1, 1], 2) == 1.0 and bounds.petrov_check([1, 1, 1, 1], 2)
    with pytest.raises(ValueError):
        bounds.petrov_rhs([2, 2], 4)
    with pytest.raises(ValueError):
        bounds.petrov_rhs([0, 2], 1)


def test_compositions_count():
    for n in range(1, 9):
        assert sum(1 for _ in bounds.compositions(n)) == 2 ** (n - 1)


def test_petrov_small_sweep():
    sweep = bounds.petrov_sweep(7)
    assert not sweep.failures
    assert sweep.checked == sum(2 ** (n - 1) * (n - 1) for n in range(2, 8))
    assert all(lhs == pytest.approx(rhs, abs=1e-9) for _, _, lhs, rhs in sweep.equalities)


def test_ramp_star_bound():
    assert bounds.ramp_star_bound(3, 0, 1.5) == 1.5
    assert bounds.ramp_star_bound(2, 1, 1.0) == 2.0
    assert bounds.ramp_star_bound(4, 2, 1.0) == 2.0
    with pytest.raises(ValueError):
        bounds.ramp_star_bound(2, 2, 1.0)
