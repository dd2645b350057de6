"""Exact anonymity leakage under an edge-eavesdropping adversary.

The initiator is uniform over the nodes and every tape assignment is
equally likely, so each (initiator, tape) outcome carries the same weight.
Leakage is the mutual information between the initiator and what the
adversary sees on the eavesdropped edges, in bits.

Three observation modes are supported:

``full``
    raw per-direction message histories
``filtered``
    only whether each round's message was empty (binary filter)
``card``
    only the number of non-empty messages per edge
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .engine import Algorithm, all_tapes, run, single_initiator
from .graph import Edge, Graph, canon

MODES = ("full", "filtered", "card")
NORM_TOL = 1e-12


class CutoffExceeded(RuntimeError):
    """An exact enumeration would exceed its configured size limit."""


def _check_distribution(d: Sequence[float]) -> np.ndarray:
    p = np.asarray(d, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise ValueError("distribution must be a non-empty 1-d sequence")
    if (p < 0).any():
        raise ValueError("distribution has negative weights")
    if abs(p.sum() - 1.0) > NORM_TOL:
        raise ValueError(f"distribution sums to {p.sum()!r}, not 1")
    return p


def shannon_entropy(d: Sequence[float]) -> float:
    p = _check_distribution(d)
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum()) + 0.0


def collision_entropy(d: Sequence[float]) -> float:
    """Renyi entropy of order 2: ``-log2 sum p^2``."""
    p = _check_distribution(d)
    return float(-math.log2((p * p).sum())) + 0.0


def block_entropy(sizes: Iterable[int]) -> float:
    """Entropy of the block index when a uniform element is drawn."""
    sizes = [s for s in sizes if s]
    n = sum(sizes)
    return shannon_entropy([s / n for s in sizes])


@dataclass(frozen=True)
class ObservationPartition:
    blocks: tuple[frozenset[int], ...]
    mode: str

    @property
    def sizes(self) -> list[int]:
        return [len(b) for b in self.blocks]

    def block_of(self, v: int) -> frozenset[int]:
        for b in self.blocks:
            if v in b:
                return b
        raise KeyError(v)

    def refines(self, other: "ObservationPartition") -> bool:
        """True when every block of ``self`` sits inside a block of ``other``."""
        return all(any(b <= c for c in other.blocks) for b in self.blocks)


def _refine(ids: tuple[int, ...], col: Sequence[int]) -> tuple[int, ...]:
    seen: dict[tuple[int, int], int] = {}
    return tuple(seen.setdefault((a, b), len(seen)) for a, b in zip(ids, col))


class ObservationProfile:
    """Per-edge observations of every (initiator, tape) outcome, precomputed.

    Every leakage query on the same algorithm and graph reuses one set of
    executions; only the grouping of outcomes changes with ``F``.
    """

    def __init__(self, algo: Algorithm, g: Graph, mode: str = "full", tape_bits: int = 0,
                 max_tape_total: int = 20, max_rounds: int | None = None, records=None):
        if mode not in MODES:
            raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")
        if tape_bits * g.n > max_tape_total:
            raise CutoffExceeded(
                f"{tape_bits} tape bits x {g.n} nodes exceeds the {max_tape_total}-bit cutoff")
        self.algo, self.graph, self.mode, self.tape_bits = algo, g, mode, tape_bits
        if records is None:
            records = [run(algo, g, single_initiator(g.n, u), tapes, max_rounds)
                       for u in range(g.n) for tapes in all_tapes(g.n, tape_bits)]
        self.records = list(records)
        self.initiators = [r.inputs.index(1) for r in self.records]
        self.labels: list[tuple[int, ...]] = []
        for e in g.edges:
            ids: dict = {}
            self.labels.append(tuple(ids.setdefault(r.observe(e, mode), len(ids))
                                     for r in self.records))
        self._cache: dict[int, float] = {}

    def with_mode(self, mode: str) -> "ObservationProfile":
        """Same executions, different observation mode."""
        return ObservationProfile(self.algo, self.graph, mode, self.tape_bits,
                                  max_tape_total=10 ** 9, records=self.records)

    @property
    def deterministic(self) -> bool:
        return self.tape_bits == 0

    def _mask(self, F: Iterable[Edge]) -> int:
        mask = 0
        for e in F:
            mask |= 1 << self.graph.edge_index(e)
        return mask

    def _ids(self, mask: int) -> tuple[int, ...]:
        ids = (0,) * len(self.records)
        for i in range(self.graph.m):
            if mask >> i & 1:
                ids = _refine(ids, self.labels[i])
        return ids

    def _mi(self, ids: tuple[int, ...]) -> float:
        n = self.graph.n
        total = len(ids)
        joint = Counter(zip(ids, self.initiators))
        per_obs = Counter(ids)
        mi = 0.0
        for (o, _), c in joint.items():
            mi += c / total * math.log2(c * n / per_obs[o])
        return max(mi, 0.0)

    def leak(self, F: Iterable[Edge] = ()) -> float:
        mask = self._mask(F)
        if mask not in self._cache:
            self._cache[mask] = self._mi(self._ids(mask))
        return self._cache[mask]

    def partition(self, F: Iterable[Edge] = ()) -> ObservationPartition:
        if not self.deterministic:
            raise ValueError("initiator partitions are only defined for deterministic runs")
        ids = self._ids(self._mask(F))
        groups: dict[int, set[int]] = {}
        for i, u in zip(ids, self.initiators):
            groups.setdefault(i, set()).add(u)
        blocks = sorted((frozenset(b) for b in groups.values()), key=min)
        return ObservationPartition(tuple(blocks), self.mode)

    def iter_subsets(self, max_size: int | None = None, max_edges: int = 20):
        """Yield ``(mask, ids)`` for every edge subset; ``ids`` groups the outcomes."""
        m = self.graph.m
        if max_size is None or max_size >= m:
            if m > max_edges:
                raise CutoffExceeded(f"2^{m} edge subsets exceeds the 2^{max_edges} cutoff")
            max_size = m
        stack = [(0, 0, 0, (0,) * len(self.records))]
        while stack:
            start, mask, size, ids = stack.pop()
            yield mask, ids
            if size < max_size:
                for e in range(start, m):
                    stack.append((e + 1, mask | 1 << e, size + 1, _refine(ids, self.labels[e])))

    def subset_leaks(self, max_size: int | None = None, max_edges: int = 20) -> dict[int, float]:
        """Leakage of every edge subset (bitmask keyed), optionally capped in size."""
        out: dict[int, float] = {}
        for mask, ids in self.iter_subsets(max_size, max_edges):
            if mask not in self._cache:
                self._cache[mask] = self._mi(ids)
            out[mask] = self._cache[mask]
        return out

    def edges_of(self, mask: int) -> tuple[Edge, ...]:
        return tuple(e for i, e in enumerate(self.graph.edges) if mask >> i & 1)

    def expected_bernoulli(self, p: float) -> float:
        """Exact ``E[leak(F)]`` when each edge joins ``F`` independently w.p. ``p``."""
        _check_p(p)
        m = self.graph.m
        total = 0.0
        for mask, val in self.subset_leaks().items():
            j = bin(mask).count("1")
            total += p ** j * (1 - p) ** (m - j) * val
        return total

    def avg_tuples(self, k: int) -> float:
        """Average leakage over all ``m^k`` ordered edge tuples (with repetition).

        A tuple only matters through its set of distinct edges, so each set
        of size ``j`` is weighted by the number of surjections ``k -> j``.
        """
        if k < 0:
            raise ValueError("k must be non-negative")
        m = self.graph.m
        leaks = self.subset_leaks(max_size=k)
        total = 0.0
        for mask, val in leaks.items():
            total += surjections(k, bin(mask).count("1")) * val
        return total / m ** k


def surjections(k: int, j: int) -> int:
    """Number of maps from a k-set onto a j-set."""
    return sum((-1) ** i * math.comb(j, i) * (j - i) ** k for i in range(j + 1))


def _check_p(p: float):
    if not 0.0 <= p <= 1.0 or math.isnan(p):
        raise ValueError(f"p must lie in [0, 1], got {p}")


# -- single-shot entry points ----------------------------------------------

def partition(algo: Algorithm, g: Graph, F: Iterable[Edge], mode: str = "full") -> ObservationPartition:
    return ObservationProfile(algo, g, mode).partition(F)


def leak_det(algo: Algorithm, g: Graph, F: Iterable[Edge]) -> float:
    """``H(O)`` for a deterministic algorithm observed through raw histories."""
    return ObservationProfile(algo, g, "full").leak(F)


def leac_det(algo: Algorithm, g: Graph, F: Iterable[Edge]) -> float:
    """Same with the binary filter applied."""
    return ObservationProfile(algo, g, "filtered").leak(F)


def leak_rand(algo: Algorithm, g: Graph, F: Iterable[Edge], tape_bits: int,
              mode: str = "full", max_tape_total: int = 20) -> float:
    """Exact ``I(initiator; observation)`` over the uniform finite tape space."""
    return ObservationProfile(algo, g, mode, tape_bits, max_tape_total).leak(F)


@dataclass(frozen=True)
class Estimate:
    value: float
    stderr: float
    samples: int
    method: str


def expected_leak_bernoulli(algo: Algorithm, g: Graph, p: float, mode: str = "full",
                            method: str = "exact", seed: int = 0, samples: int = 2000,
                            tape_bits: int = 0, profile: ObservationProfile | None = None) -> Estimate:
    _check_p(p)
    prof = profile or ObservationProfile(algo, g, mode, tape_bits)
    if method == "exact":
        return Estimate(prof.expected_bernoulli(p), 0.0, 0, "exact")
    if method != "monte_carlo":
        raise ValueError(f"unknown method {method!r}")
    if samples < 2:
        raise ValueError("Monte Carlo needs at least 2 samples")
    values = np.empty(samples)
    edges = g.edges
    # one child seed per sample keeps results independent of evaluation order
    for i, child in enumerate(np.random.SeedSequence(seed).spawn(samples)):
        draw = np.random.default_rng(child).random(g.m) < p
        values[i] = prof.leak(e for e, keep in zip(edges, draw) if keep)
    return Estimate(float(values.mean()), float(values.std(ddof=1) / math.sqrt(samples)),
                    samples, "monte_carlo")


def avg_leak_tuples(algo: Algorithm, g: Graph, k: int, mode: str = "full",
                    tape_bits: int = 0) -> float:
    return ObservationProfile(algo, g, mode, tape_bits).avg_tuples(k)


def capped_class_count(sizes: Iterable[int], W: int) -> int:
    """``sum_i min(W + 1, n_i)`` over block sizes ``n_i``."""
    return sum(min(W + 1, s) for s in sizes)


def chi_star(algo: Algorithm, g: Graph, F: Iterable[Edge], W: int) -> int:
    """Communication-capped class count of the card-mode partition on ``F``."""
    return capped_class_count(partition(algo, g, F, "card").sizes, W)


def tree_component_entropy(g: Graph, tree_edges: Iterable[Edge], F: Iterable[Edge]) -> float:
    """Entropy of component sizes of ``(V, tree_edges - F)``."""
    from .graph import components

    cut = {canon(*e) for e in F}
    kept = [e for e in tree_edges if canon(*e) not in cut]
    return block_entropy(len(b) for b in components(g, kept))
