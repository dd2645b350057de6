"""Invariant suite over a family of graphs and algorithms.

Each check either passes or yields a :class:`Violation` carrying a small
witness. :func:`run_suite` aggregates counts so the CLI can print one
summary line per check.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

from . import bounds
from .algorithms import Convergecast, make_algorithm
from .engine import (Algorithm, all_tapes, check_or_correctness, input_family, run,
                     worst_case_comm)
from .graph import Graph, all_pairs_distance, components, connected_atlas, named_graph
from .leakage import ObservationProfile, tree_component_entropy
from .ramp import (check_star_bound, packed_shamir, ramp_structure, share_size_lower_bound,
                   verify_scheme)
from .report import BoundRow

TOL = 1e-9
KS = (0, 1, 2, 3, 4)
PS = (0.0, 0.25, 0.5, 0.75, 1.0)
DEFAULT_ALGOS = ("convergecast", "silent", "dummy", "rebased", "rebased:inner=silent")
EXHAUSTIVE_MAX_EDGES = 10
# deterministic single-tape profiles stay cheap well past the general cutoff
CLOSED_FORM_MAX_EDGES = 15


class FamilyError(ValueError):
    pass


def parse_family(spec: str) -> list[Graph]:
    """Graphs from ``default``, ``atlas:N`` and generator names, comma separated."""
    graphs: list[Graph] = []
    for tok in (t.strip() for t in spec.split(",")):
        if not tok:
            continue
        if tok == "default":
            graphs += connected_atlas(5)
            graphs += [named_graph(f"{k}:6") for k in ("star", "path", "cycle", "complete")]
        elif tok.startswith("atlas:"):
            graphs += connected_atlas(int(tok[6:]))
        else:
            graphs.append(named_graph(tok))
    if not graphs:
        raise FamilyError("graph family is empty")
    return graphs


@dataclass
class Violation:
    check: str
    graph: str
    algo: str
    witness: dict

    def __str__(self):
        return f"{self.check} violated on {self.graph} by {self.algo}: {self.witness}"


@dataclass
class Summary:
    counts: dict = field(default_factory=dict)
    violations: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    def record(self, check: str, ok: bool, violation: Violation | None = None):
        passed, failed = self.counts.get(check, (0, 0))
        self.counts[check] = (passed + ok, failed + (not ok))
        if not ok and violation is not None:
            self.violations.append(violation)

    @property
    def ok(self) -> bool:
        return not any(f for _, f in self.counts.values())


# -- individual checks ------------------------------------------------------------

def split_violations(full: ObservationProfile, limit: int = 1):
    """Edge sets that separate u from v yet leave their observations equal.

    Outcomes (initiator, tape) sharing an observation must all have their
    initiators in one component of ``(V, E - F)``.
    """
    g = full.graph
    found = []
    for mask, ids in full.iter_subsets():
        F = full.edges_of(mask)
        comp = {}
        for i, b in enumerate(components(g, [e for e in g.edges if e not in F])):
            for v in b:
                comp[v] = i
        seen: dict[int, int] = {}
        for oid, u in zip(ids, full.initiators):
            w = seen.setdefault(oid, u)
            if comp[w] != comp[u]:
                found.append({"F": list(F), "u": w, "v": u})
                break
        if len(found) >= limit:
            break
    return found


def rcase_violations(full: ObservationProfile):
    out = []
    for mask, val in full.subset_leaks().items():
        F = full.edges_of(mask)
        h = bounds.rcase_bound(full.graph, F).h_comp
        if val < h - TOL:
            out.append({"F": list(F), "leak": val, "h_comp": h})
    return out


def path_violations(full: ObservationProfile):
    """Edges where the histories of I_u and I_v differ must connect u and v."""
    g = full.graph
    d = all_pairs_distance(g)
    out = []
    for u, v in itertools.combinations(range(g.n), 2):
        diff = [e for i, e in enumerate(g.edges) if full.labels[i][u] != full.labels[i][v]]
        joined = any(u in b and v in b for b in components(g, diff))
        if not joined or len(diff) < d[u][v]:
            out.append({"u": u, "v": v, "differing": diff})
    return out


def histc_violations(full: ObservationProfile):
    g = full.graph
    out = []
    for a, b in itertools.combinations(full.records, 2):
        for e in g.edges:
            if a.observe(e) != b.observe(e):
                ca, cb = a.card(e), b.card(e)
                if ca == cb and not (ca > 0 and cb > 0):
                    out.append({"edge": e, "cards": (ca, cb)})
    return out


def locality_violations(algo: Algorithm, g: Graph, tape_bits: int, max_pairs: int = 5000):
    """Equal input, tape and incoming k-prefixes at v force equal outgoing (k+1)-prefixes."""
    recs = [run(algo, g, inp, t) for inp in input_family(g.n) for t in all_tapes(g.n, tape_bits)]
    pairs = itertools.combinations(recs, 2)
    out = []
    for a, b in itertools.islice(pairs, max_pairs):
        horizon = max(a.rounds, b.rounds) + 1
        for v in range(g.n):
            if a.inputs[v] != b.inputs[v] or a.tapes[v] != b.tapes[v]:
                continue
            nbrs = g.neighbors(v)
            k = 0
            while k < horizon and all(_pref(a, w, v, k + 1) == _pref(b, w, v, k + 1) for w in nbrs):
                k += 1
            for w in nbrs:
                if _pref(a, v, w, k + 1) != _pref(b, v, w, k + 1):
                    out.append({"node": v, "k": k, "to": w,
                                "inputs": (a.inputs, b.inputs)})
    return out


def _pref(rec, u, v, k):
    seq = rec.directed(u, v)
    return (seq + (None,) * k)[:k]


def k2_violations(algo: Algorithm, g: Graph, tape_bits: int):
    if g.n != 2:
        return []
    e = g.edges[0]
    hu = [run(algo, g, (1, 0), t).observe(e) for t in all_tapes(2, tape_bits)]
    hv = [run(algo, g, (0, 1), t).observe(e) for t in all_tapes(2, tape_bits)]
    return [{"history": h} for h in set(hu) & set(hv)]


def monotone_violations(full: ObservationProfile, filt: ObservationProfile, card: ObservationProfile):
    """leac <= leak, leak grows with F, and card/filtered/full partitions nest."""
    out = []
    lf, lc = full.subset_leaks(), filt.subset_leaks()
    m = full.graph.m
    for mask, val in lf.items():
        if lc[mask] > val + TOL:
            out.append({"F": list(full.edges_of(mask)), "leac": lc[mask], "leak": val})
        for i in range(m):
            if not mask >> i & 1 and lf[mask | 1 << i] < val - TOL:
                out.append({"F": list(full.edges_of(mask)), "added": full.graph.edges[i]})
        if full.deterministic:
            F = full.edges_of(mask)
            pf, pl, pc = full.partition(F), filt.partition(F), card.partition(F)
            if not (pf.refines(pl) and pl.refines(pc)):
                out.append({"F": list(F), "partitions": (pf.blocks, pl.blocks, pc.blocks)})
    return out


def bound_rows(full: ObservationProfile, filt: ObservationProfile, W: int | None = None,
               ks=KS, ps=PS) -> list[BoundRow]:
    """Measured leakage against every closed-form bound, for a deterministic algorithm."""
    g = full.graph
    n, m = g.n, g.m
    if W is None:
        W = worst_case_comm(full.algo, g, full.tape_bits)
    # active sets are per initiator, so only defined without randomness
    active = [r.active_edges() for r in full.records] if full.deterministic else None
    rows = []
    for k in ks:
        leak, leac = full.avg_tuples(k), filt.avg_tuples(k)
        rows.append(BoundRow("sparse_k", f"k={k}", bounds.sparse_bound_k(g, k), leak))
        rows.append(BoundRow("dense_k", f"k={k}", bounds.dense_bound_k(n, m, k), leak))
        if active is not None:
            rows.append(BoundRow("sparsec_k", f"k={k}", bounds.sparsec_bound_k(g, active, k), leac))
        rows.append(BoundRow("sparsec_coro_k", f"k={k},W={W}", bounds.sparsec_coro_bound_k(g, W, k), leac))
        b = bounds.densec_bound_k(n, m, W, k)
        rows.append(BoundRow("densec_k", f"k={k},W={W}", b.value, leac, b.hypothesis_ok))
    for p in ps:
        leak, leac = full.expected_bernoulli(p), filt.expected_bernoulli(p)
        rows.append(BoundRow("sparse_p", f"p={p}", bounds.sparse_bound_p(g, p), leak))
        rows.append(BoundRow("dense_p", f"p={p}", bounds.dense_bound_p(n, p), leak))
        if active is not None:
            rows.append(BoundRow("sparsec_p", f"p={p}", bounds.sparsec_bound_p(g, active, p), leac))
        rows.append(BoundRow("sparsec_coro_p", f"p={p},W={W}", bounds.sparsec_coro_bound_p(g, W, p), leac))
        b = bounds.densec_bound_p(n, W, p)
        rows.append(BoundRow("densec_p", f"p={p},W={W}", b.value, leac, b.hypothesis_ok))
    return rows


def convergecast_form_violations(algo: Convergecast, full: ObservationProfile,
                                 filt: ObservationProfile):
    g = full.graph
    out = []
    tree_edges = algo.tree.edges
    for mask, val in full.subset_leaks().items():
        F = full.edges_of(mask)
        want = tree_component_entropy(g, tree_edges, F)
        if abs(val - want) > TOL:
            out.append({"F": list(F), "leak": val, "closed_form": want})
    for mask, val in filt.subset_leaks().items():
        if abs(val) > TOL:
            out.append({"F": list(filt.edges_of(mask)), "leac": val})
    wcom = worst_case_comm(algo, g)
    if wcom != g.n - 1:
        out.append({"wcom": wcom, "expected": g.n - 1})
    return out


# -- driver ---------------------------------------------------------------------------

def check_pair(g: Graph, spec: str, summary: Summary, with_bounds: bool = True):
    algo, bits = make_algorithm(spec, g)
    label, name = g.label(), algo.describe()

    def rec(check, found):
        summary.record(check, not found, Violation(check, label, name, found[0]) if found else None)

    res = check_or_correctness(algo, g, tape_bits=bits)
    rec("or_correctness", [] if res.ok else [res.witness])
    inp = (1,) + (0,) * (g.n - 1)
    tapes = next(all_tapes(g.n, bits))
    rec("determinism", [] if run(algo, g, inp, tapes) == run(algo, g, inp, tapes)
        else [{"inputs": inp}])
    rec("locality", locality_violations(algo, g, bits)[:1])
    if g.n == 2:
        rec("k2_histories_differ", k2_violations(algo, g, bits)[:1])

    full = ObservationProfile(algo, g, "full", bits)
    exhaustive = g.m <= EXHAUSTIVE_MAX_EDGES
    if exhaustive:
        rec("split", split_violations(full))
        rec("rcase", rcase_violations(full)[:1])
    rec("histc", histc_violations(full)[:1])
    if not res.ok:
        return
    filt = full.with_mode("filtered")
    if bits == 0:
        card = full.with_mode("card")
        rec("path", path_violations(full)[:1])
        if exhaustive:
            rec("leakage_order", monotone_violations(full, filt, card)[:1])
        if isinstance(algo, Convergecast) and algo.mode == "always" and g.m <= CLOSED_FORM_MAX_EDGES:
            rec("convergecast_closed_form", convergecast_form_violations(algo, full, filt)[:1])
    if with_bounds and exhaustive:
        for row in bound_rows(full, filt):
            if row.hypothesis_ok:
                rec(f"bound_{row.theorem}", [] if row.ok else [{
                    "params": row.params, "bound": row.bound_bits,
                    "measured": row.measured_bits}])


def ramp_checks(summary: Summary):
    for q in (5, 7):
        for n in range(1, 5):
            for r in range(1, n + 1):
                for s in range(r):
                    j = packed_shamir(s, r, n, q)
                    rep = verify_scheme(j, ramp_structure(s, r, n))
                    summary.record("ramp_packed_shamir", rep.ok, None if rep.ok else Violation(
                        "ramp_packed_shamir", f"({s},{r},{n})", f"q={q}", {"failures": rep.failures[:2]}))
                    ent_ok = all(abs(h - math.log2(q)) <= TOL for h in j.share_entropies())
                    summary.record("ramp_optimal_shares", ent_ok)
                    if r == n:
                        summary.record("ramp_star_bound", check_star_bound(j, s).ok)
    summary.record("ramp_star_equality", check_star_bound(packed_shamir(1, 2, 2, 2), 1).equality)
    summary.record("ramp_share_size", abs(share_size_lower_bound(1, 2, 3) - math.log2(3)) <= TOL)


def run_suite(graphs: list[Graph], algos=DEFAULT_ALGOS, petrov_max_n: int = 12,
              with_ramp: bool = True, with_bounds: bool = True) -> Summary:
    if not graphs:
        raise FamilyError("graph family is empty")
    if not algos:
        raise FamilyError("algorithm family is empty")
    summary = Summary()
    for g in graphs:
        for spec in algos:
            check_pair(g, spec, summary, with_bounds)
    if petrov_max_n >= 2:
        sweep = bounds.petrov_sweep(petrov_max_n)
        for comp, m, lhs, rhs in sweep.failures:
            summary.record("petrov", False, Violation("petrov", str(comp), f"m={m}",
                                                      {"lhs": lhs, "rhs": rhs}))
        summary.counts["petrov"] = (sweep.checked - len(sweep.failures), len(sweep.failures))
        summary.notes.append(f"petrov: {len(sweep.equalities)} equality cases")
    if with_ramp:
        ramp_checks(summary)
    return summary
