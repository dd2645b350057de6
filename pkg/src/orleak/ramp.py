"""Finite secret-sharing schemes as exact joint probability tables.

A scheme is a table over ``(secret, shares)`` tuples. Reconstruction and
secrecy are checked by computing conditional entropies exactly from the
table, so any scheme small enough to enumerate can be verified, whether it
was built here (packed Shamir) or read from execution histories.
"""

from __future__ import annotations

import itertools
import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Mapping

from .engine import all_tapes, run, single_initiator
from .graph import Graph, canon, components

TOL = 1e-9
MAX_TABLE = 10 ** 6


class SchemeError(ValueError):
    pass


def _entropy(probs: Iterable[float]) -> float:
    return -sum(p * math.log2(p) for p in probs if p > 0) + 0.0


@dataclass(frozen=True)
class JointDistribution:
    n: int
    table: Mapping[tuple[Hashable, tuple], float]

    def __post_init__(self):
        total = 0.0
        for (_, shares), p in self.table.items():
            if len(shares) != self.n:
                raise SchemeError(f"share vector of length {len(shares)} for {self.n} parties")
            if p < 0:
                raise SchemeError("negative probability")
            total += p
        if abs(total - 1.0) > 1e-12:
            raise SchemeError(f"probabilities sum to {total!r}")

    def _marginal(self, with_secret: bool, parties) -> dict:
        out: dict = defaultdict(float)
        for (secret, shares), p in self.table.items():
            key = tuple(shares[i] for i in parties)
            out[(secret, key) if with_secret else key] += p
        return out

    def secret_entropy(self) -> float:
        out: dict = defaultdict(float)
        for (secret, _), p in self.table.items():
            out[secret] += p
        return _entropy(out.values())

    def share_entropy(self, i: int) -> float:
        return _entropy(self._marginal(False, (i,)).values())

    def share_entropies(self) -> list[float]:
        return [self.share_entropy(i) for i in range(self.n)]

    def share_size(self) -> float:
        """Largest Hartley entropy ``log2 |support(S_i)|`` over the parties."""
        return max(math.log2(len(self._marginal(False, (i,)))) for i in range(self.n))

    def conditional_entropy(self, parties: Iterable[int]) -> float:
        """``H(secret | shares of parties)``."""
        parties = tuple(sorted(parties))
        joint = _entropy(self._marginal(True, parties).values())
        return max(joint - _entropy(self._marginal(False, parties).values()), 0.0)

    def mutual_information(self, parties: Iterable[int]) -> float:
        return max(self.secret_entropy() - self.conditional_entropy(parties), 0.0)

    def to_obj(self) -> dict:
        return {
            "parties": self.n,
            "entries": [{"secret": _jsonable(s), "shares": [_jsonable(x) for x in sh], "prob": p}
                        for (s, sh), p in self.table.items()],
        }

    @classmethod
    def from_obj(cls, obj: dict) -> "JointDistribution":
        table: dict = defaultdict(float)
        try:
            for row in obj["entries"]:
                table[(_hashable(row["secret"]), tuple(_hashable(x) for x in row["shares"]))] += float(row["prob"])
            return cls(int(obj["parties"]), dict(table))
        except (KeyError, TypeError) as exc:
            raise SchemeError(f"malformed scheme table: {exc}") from None


def _jsonable(x):
    return [_jsonable(y) for y in x] if isinstance(x, tuple) else x


def _hashable(x):
    return tuple(_hashable(y) for y in x) if isinstance(x, list) else x


@dataclass(frozen=True)
class PartialAccessStructure:
    n: int
    unqualified: frozenset[frozenset[int]]
    qualified: frozenset[frozenset[int]]

    def __post_init__(self):
        if not self.qualified or not self.unqualified:
            raise SchemeError("both families must be non-empty")
        if self.qualified & self.unqualified:
            raise SchemeError("a subset is both qualified and unqualified")
        parties = range(self.n)
        for B in self.qualified | self.unqualified:
            if not B <= frozenset(parties):
                raise SchemeError(f"{set(B)} mentions a party outside 0..{self.n - 1}")
        for B in self.qualified:
            for x in parties:
                if B | {x} not in self.qualified:
                    raise SchemeError("qualified family is not monotone")
        for B in self.unqualified:
            for x in B:
                if B - {x} not in self.unqualified:
                    raise SchemeError("unqualified family is not anti-monotone")


def subsets(n: int):
    for size in range(n + 1):
        for c in itertools.combinations(range(n), size):
            yield frozenset(c)


def ramp_structure(s: int, r: int, n: int) -> PartialAccessStructure:
    if not 0 <= s < r <= n:
        raise SchemeError(f"need 0 <= s < r <= n, got ({s}, {r}, {n})")
    all_b = list(subsets(n))
    return PartialAccessStructure(
        n,
        frozenset(B for B in all_b if len(B) <= s),
        frozenset(B for B in all_b if len(B) >= r),
    )


@dataclass
class SchemeReport:
    ok: bool
    reconstruction: dict = field(default_factory=dict)
    secrecy: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)


def verify_scheme(j: JointDistribution, a: PartialAccessStructure, tol: float = TOL) -> SchemeReport:
    """Check ``H(S|B) = 0`` on qualified sets and ``H(S|B) = H(S)`` on unqualified ones."""
    if a.n != j.n:
        raise SchemeError(f"structure has {a.n} parties, table has {j.n}")
    hs = j.secret_entropy()
    report = SchemeReport(True)
    for B in sorted(a.qualified, key=lambda b: (len(b), sorted(b))):
        h = j.conditional_entropy(B)
        report.reconstruction[B] = h
        if h > tol:
            report.ok = False
            report.failures.append(("reconstruction", sorted(B), h))
    for B in sorted(a.unqualified, key=lambda b: (len(b), sorted(b))):
        h = j.conditional_entropy(B)
        report.secrecy[B] = h
        if abs(h - hs) > tol:
            report.ok = False
            report.failures.append(("secrecy", sorted(B), h))
    return report


def is_prime(q: int) -> bool:
    return q >= 2 and all(q % d for d in range(2, math.isqrt(q) + 1))


def packed_shamir(s: int, r: int, n: int, q: int) -> JointDistribution:
    """(s, r, n)-ramp scheme over GF(q) from a random polynomial of degree < r.

    The ``s`` low coefficients are uniform randomness and the ``r - s``
    high coefficients are the secret. Party ``i`` (1-based) holds the
    evaluation at ``i mod q``, so up to ``q`` parties get distinct points.
    Any ``s`` shares are a bijective image of the random coefficients,
    hence independent of the secret; any ``r`` shares fix the polynomial.
    """
    if not 0 <= s < r <= n:
        raise SchemeError(f"need 0 <= s < r <= n, got ({s}, {r}, {n})")
    if not is_prime(q):
        raise SchemeError(f"q = {q} is not prime")
    if n > q:
        raise SchemeError(f"GF({q}) has only {q} distinct evaluation points for {n} parties")
    if q ** r > MAX_TABLE:
        raise SchemeError(f"table of q^r = {q ** r} rows exceeds {MAX_TABLE}")
    points = [i % q for i in range(1, n + 1)]
    prob = 1.0 / q ** r
    table = {}
    for coeffs in itertools.product(range(q), repeat=r):
        shares = tuple(sum(c * pow(x, e, q) for e, c in enumerate(coeffs)) % q for x in points)
        table[(coeffs[s:], shares)] = prob
    return JointDistribution(n, table)


def share_entropy_sum(j: JointDistribution) -> float:
    return sum(j.share_entropies())


@dataclass(frozen=True)
class StarCheck:
    ok: bool
    share_sum: float
    bound: float

    @property
    def equality(self) -> bool:
        return abs(self.share_sum - self.bound) <= TOL


def check_star_bound(j: JointDistribution, k: int) -> StarCheck:
    """Total share entropy of a verified (k, n, n)-ramp scheme against ``n/(n-k) H(S)``."""
    from .bounds import ramp_star_bound

    if not verify_scheme(j, ramp_structure(k, j.n, j.n)).ok:
        raise SchemeError(f"table is not a ({k}, {j.n}, {j.n})-ramp scheme")
    total = share_entropy_sum(j)
    bound = ramp_star_bound(j.n, k, j.secret_entropy())
    return StarCheck(total >= bound - TOL, total, bound)


def share_size_lower_bound(s: int, r: int, n: int) -> float:
    """Minimum share size (bits) of any (s, r, n)-ramp scheme for a one-bit secret."""
    if not 1 <= s < r < n:
        raise SchemeError(f"need 1 <= s < r < n, got ({s}, {r}, {n})")
    return max(math.log2((n - s + 1) / (r - s)), math.log2((r + 1) / (r - s)))


def average_subset_leakage(j: JointDistribution, k: int) -> float:
    """Mean ``I(S; shares of B)`` over all ``k``-subsets of parties."""
    subs = list(itertools.combinations(range(j.n), k))
    return sum(j.mutual_information(B) for B in subs) / len(subs)


# -- histories as shares --------------------------------------------------------

def disconnecting_sets(g: Graph, u: int, v: int, max_edges: int = 20) -> list[frozenset]:
    """Every edge set whose removal separates ``u`` from ``v``."""
    if g.m > max_edges:
        raise SchemeError(f"2^{g.m} edge subsets exceeds the cutoff")
    out = []
    for size in range(g.m + 1):
        for F in itertools.combinations(g.edges, size):
            kept = [e for e in g.edges if e not in F]
            if not any(u in b and v in b for b in components(g, kept)):
                out.append(frozenset(F))
    return out


@dataclass
class HistoryScheme:
    joint: JointDistribution
    edges: tuple
    qualified: list
    reconstruction_failures: list
    secrecy_sets: list

    @property
    def ok(self) -> bool:
        return not self.reconstruction_failures


def histories_as_scheme(algo, g: Graph, u: int, v: int, tape_bits: int = 0,
                        max_tape_total: int = 20) -> HistoryScheme:
    """Per-edge histories as shares of the secret "which of u, v initiated".

    Every edge set whose removal separates ``u`` from ``v`` must reconstruct
    the secret. Edge sets that reveal nothing are reported, not asserted.
    """
    if u == v:
        raise SchemeError("u and v must differ")
    if tape_bits * g.n > max_tape_total:
        raise SchemeError("joint tape space exceeds the cutoff")
    tapes = list(all_tapes(g.n, tape_bits))
    prob = 1.0 / (2 * len(tapes))
    table: dict = defaultdict(float)
    for who in (u, v):
        for t in tapes:
            rec = run(algo, g, single_initiator(g.n, who), t)
            table[(who, tuple(rec.observe(e) for e in g.edges))] += prob
    joint = JointDistribution(g.m, dict(table))
    index = {e: i for i, e in enumerate(g.edges)}
    qualified = disconnecting_sets(g, u, v)
    failures = []
    for F in qualified:
        h = joint.conditional_entropy(index[e] for e in F)
        if h > TOL:
            failures.append((sorted(F), h))
    hs = joint.secret_entropy()
    secrecy = []
    for size in range(g.m + 1):
        for F in itertools.combinations(g.edges, size):
            if abs(joint.conditional_entropy(index[e] for e in F) - hs) <= TOL:
                secrecy.append(frozenset(canon(*e) for e in F))
    return HistoryScheme(joint, g.edges, qualified, failures, secrecy)
