"""Closed-form lower bounds on anonymity leakage, and the Petrov inequality.

Every function here is arithmetic on graph statistics; none of them runs
the simulator. Powers follow the convention ``0 ** 0 == 1`` so that the
diagonal ``u == v`` terms contribute 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .graph import Edge, Graph, all_pairs_distance, canon, components, connected_supersets, disc


def _neg_log_mean(total: float, n: int) -> float:
    # clamp round-off so an exact 1.0 prints as 0.0, not -0.0 or -1e-16
    return max(-math.log2(total / (n * n)), 0.0) + 0.0


@dataclass(frozen=True)
class RcaseBound:
    h_comp: float
    printed: float
    sizes: tuple[int, ...]


def rcase_bound(g: Graph, F: Iterable[Edge]) -> RcaseBound:
    """Component-index entropy of ``(V, E - F)``, with the printed variant alongside.

    ``h_comp = -sum (n_i/n) log2(n_i/n)`` is what the observation is
    guaranteed to reveal. ``printed = log2 n + sum (n_i/n) log2(n_i/n)``
    equals ``log2 n - h_comp``.
    """
    cut = {canon(*e) for e in F}
    sizes = tuple(len(b) for b in components(g, [e for e in g.edges if e not in cut]))
    n = g.n
    h = -sum(s / n * math.log2(s / n) for s in sizes) + 0.0
    return RcaseBound(h, math.log2(n) - h + 0.0, sizes)


def sparse_bound_k(g: Graph, k: int) -> float:
    if k < 0:
        raise ValueError("k must be non-negative")
    d = all_pairs_distance(g)
    m = g.m
    return _neg_log_mean(sum((1 - x / m) ** k for x in d.flat), g.n)


def sparse_bound_p(g: Graph, p: float) -> float:
    _check_p(p)
    d = all_pairs_distance(g)
    return _neg_log_mean(sum((1 - p) ** int(x) for x in d.flat), g.n)


def dense_bound_k(n: int, m: int, k: int) -> float:
    if n < 2 or m < 1 or k < 0:
        raise ValueError("need n >= 2, m >= 1, k >= 0")
    return (1 - (1 - 1 / m) ** k) * math.log2(n)


def dense_bound_p(n: int, p: float) -> float:
    _check_p(p)
    if n < 2:
        raise ValueError("need n >= 2")
    return p * math.log2(n)


def disc_matrix(g: Graph, active_sets: Sequence[Iterable[Edge]]) -> list[list[int]]:
    """``disc(u, v | A_u & A_v)`` for every ordered pair."""
    sets = [frozenset(canon(*e) for e in a) for a in active_sets]
    if len(sets) != g.n:
        raise ValueError("need one active edge set per node")
    return [[0 if u == v else disc(g, u, v, sets[u] & sets[v]) for v in range(g.n)]
            for u in range(g.n)]


def sparsec_bound_k(g: Graph, active_sets, k: int) -> float:
    m = g.m
    dm = disc_matrix(g, active_sets)
    return _neg_log_mean(sum((1 - x / m) ** k for row in dm for x in row), g.n)


def sparsec_bound_p(g: Graph, active_sets, p: float) -> float:
    _check_p(p)
    dm = disc_matrix(g, active_sets)
    return _neg_log_mean(sum((1 - p) ** x for row in dm for x in row), g.n)


def _coro(g: Graph, W: int, term) -> float:
    if W < 0:
        raise ValueError("W must be non-negative")
    d = all_pairs_distance(g)
    total = 0.0
    for u in range(g.n):
        # worst case over the connected sets the active edges could cover
        total += max(sum(term(min(d[x][v] for x in U)) for v in range(g.n))
                     for U in connected_supersets(g, u, min(W + 1, g.n)))
    return _neg_log_mean(total, g.n)


def sparsec_coro_bound_k(g: Graph, W: int, k: int) -> float:
    """Bound where each ``u`` may hide inside a connected set of at most ``W + 1`` nodes.

    The inner optimisation takes the largest collision mass over such sets.
    No proof accompanies this bound; treat it as an empirical claim.
    """
    m = g.m
    return _coro(g, W, lambda x: (1 - x / m) ** k)


def sparsec_coro_bound_p(g: Graph, W: int, p: float) -> float:
    _check_p(p)
    return _coro(g, W, lambda x: (1 - p) ** int(x))


@dataclass(frozen=True)
class Bound:
    value: float
    hypothesis_ok: bool


def densec_bound_k(n: int, m: int, W: int, k: int) -> Bound:
    if W >= n - 1:
        return Bound(0.0, False)
    return Bound((1 - (1 - 1 / m) ** k) * math.log2(n / (W + 1)), True)


def densec_bound_p(n: int, W: int, p: float) -> Bound:
    _check_p(p)
    if W >= n - 1:
        return Bound(0.0, False)
    return Bound(p * math.log2(n / (W + 1)), True)


def petrov_lhs(block_sizes: Sequence[int]) -> float:
    n = sum(block_sizes)
    return -sum(s / n * math.log2(s / n) for s in block_sizes) + 0.0


def petrov_rhs(block_sizes: Sequence[int], m: int) -> float:
    """``(sum min(n_i, m) - m) / (n - m) * log2(n / m)``."""
    if any(s < 1 for s in block_sizes):
        raise ValueError("block sizes must be positive")
    n = sum(block_sizes)
    if not 1 <= m < n:
        raise ValueError(f"need 1 <= m < n, got m={m}, n={n}")
    return (sum(min(s, m) for s in block_sizes) - m) / (n - m) * math.log2(n / m)


def petrov_check(block_sizes: Sequence[int], m: int, tol: float = 1e-9) -> bool:
    return petrov_lhs(block_sizes) >= petrov_rhs(block_sizes, m) - tol


def compositions(n: int):
    """Ordered tuples of positive integers summing to ``n``."""
    if n == 0:
        yield ()
        return
    for first in range(1, n + 1):
        for rest in compositions(n - first):
            yield (first,) + rest


@dataclass
class PetrovSweep:
    checked: int
    failures: list
    equalities: list


def petrov_sweep(max_n: int, tol: float = 1e-9) -> PetrovSweep:
    """Check every composition with ``2 <= n <= max_n`` against every ``1 <= m < n``."""
    checked, failures, equalities = 0, [], []
    for n in range(2, max_n + 1):
        for comp in compositions(n):
            lhs = petrov_lhs(comp)
            for m in range(1, n):
                rhs = petrov_rhs(comp, m)
                checked += 1
                if lhs < rhs - tol:
                    failures.append((comp, m, lhs, rhs))
                elif abs(lhs - rhs) <= tol:
                    equalities.append((comp, m, lhs, rhs))
    return PetrovSweep(checked, failures, equalities)


def ramp_star_bound(n: int, k: int, secret_entropy: float) -> float:
    """Minimum total share entropy of a (k, n, n)-ramp scheme: ``n/(n-k) * H``."""
    if not 0 <= k < n:
        raise ValueError(f"need 0 <= k < n, got k={k}, n={n}")
    return n / (n - k) * secret_entropy


def _check_p(p: float):
    if not 0.0 <= p <= 1.0 or math.isnan(p):
        raise ValueError(f"p must lie in [0, 1], got {p}")
