"""``orleak`` command line: simulate, leakage, bounds, verify, ramp.

Exit codes: 0 success, 2 configuration error, 3 invariant violation,
4 resource cutoff.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import bounds, verify
from .algorithms import AlgorithmSpecError, make_algorithm
from .engine import NonTermination, TapeExhausted, run, single_initiator, worst_case_comm
from .graph import Graph, GraphError, edge_set, load_graph
from .leakage import CutoffExceeded, MODES, ObservationProfile, expected_leak_bernoulli
from .ramp import (JointDistribution, SchemeError, packed_shamir, ramp_structure,
                   share_entropy_sum, share_size_lower_bound, verify_scheme)
from .report import BOUND_HEADER, LEAKAGE_HEADER, BoundRow, LeakageRow, render

EXIT_OK, EXIT_CONFIG, EXIT_INVARIANT, EXIT_CUTOFF = 0, 2, 3, 4

K_THEOREMS = ("sparse_k", "dense_k", "sparsec_k", "sparsec_coro_k", "densec_k")
P_THEOREMS = ("sparse_p", "dense_p", "sparsec_p", "sparsec_coro_p", "densec_p")
THEOREMS = K_THEOREMS + P_THEOREMS + ("rcase", "petrov")
# theorems about the binary filter are compared against filtered leakage
FILTERED = {"sparsec_k", "sparsec_coro_k", "densec_k", "sparsec_p", "sparsec_coro_p", "densec_p"}


class ConfigError(ValueError):
    pass


# -- helpers --------------------------------------------------------------------------

def _graph(args) -> Graph:
    if not args.graph:
        raise ConfigError("--graph is required")
    return load_graph(args.graph)


def _algo(args, g: Graph):
    if not args.algo:
        raise ConfigError("--algo is required")
    return make_algorithm(args.algo, g)


def _parse_F(text: str, g: Graph):
    text = text.strip()
    if text == "all":
        return g.edges
    pairs = []
    for item in filter(None, (t.strip() for t in text.split(","))):
        a, sep, b = item.partition("-")
        if not sep:
            raise ConfigError(f"edge {item!r} is not of the form u-v")
        try:
            pairs.append((int(a), int(b)))
        except ValueError:
            raise ConfigError(f"edge {item!r} has non-integer endpoints") from None
    return edge_set(g, pairs)


def _fmt_F(F) -> str:
    return ",".join(f"{u}-{v}" for u, v in F)


def _emit(args, text: str):
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _note(msg: str):
    print(msg, file=sys.stderr)


# -- simulate -------------------------------------------------------------------------

def cmd_simulate(args) -> int:
    g = _graph(args)
    algo, bits = _algo(args, g)
    if args.tape_bits is not None:
        bits = args.tape_bits
    init = None if args.initiator in (None, "none") else int(args.initiator)
    if init is not None and not 0 <= init < g.n:
        raise ConfigError(f"initiator {init} is not a node")
    rng = np.random.default_rng(args.seed)
    tapes = tuple(tuple(int(b) for b in rng.integers(0, 2, bits)) for _ in range(g.n))
    rec = run(algo, g, single_initiator(g.n, init), tapes)
    obj = rec.to_obj()
    obj.update(graph=g.label(), algo=algo.describe(), tape_bits=bits, seed=args.seed)
    if args.format == "json":
        _emit(args, json.dumps(obj, indent=2) + "\n")
        return EXIT_OK
    rows = [dict(m, record="message", edge="-".join(map(str, m["edge"])), payload_hex=m["payload_hex"] or "")
            for m in obj["history"]]
    rows += [dict(record="output", node=v, output=o) for v, o in sorted(rec.outputs.items())]
    _emit(args, render(rows, "csv", ["record", "edge", "dir", "round", "payload_hex", "node", "output"]))
    return EXIT_OK


# -- leakage --------------------------------------------------------------------------

def cmd_leakage(args) -> int:
    g = _graph(args)
    algo, bits = _algo(args, g)
    if not (args.F or args.p or args.k):
        raise ConfigError("give at least one of --F, --p, --k")
    prof = ObservationProfile(algo, g, args.mode, bits)
    base = dict(graph=g.label(), algo=algo.describe(), mode=args.mode, tape_bits=bits)
    rows = []
    for text in args.F or ():
        F = _parse_F(text, g)
        rows.append(LeakageRow(F=_fmt_F(F), value_bits=prof.leak(F), **base))
    for p in args.p or ():
        est = expected_leak_bernoulli(algo, g, p, args.mode, args.method, args.seed,
                                      args.samples, bits, profile=prof)
        rows.append(LeakageRow(p=p, value_bits=est.value, method=est.method,
                               samples=est.samples, stderr=est.stderr, **base))
    for k in args.k or ():
        if k < 0:
            raise ConfigError("k must be non-negative")
        rows.append(LeakageRow(k=k, value_bits=prof.avg_tuples(k), **base))
    _emit(args, render(rows, args.format, LEAKAGE_HEADER))
    return EXIT_OK


# -- bounds ---------------------------------------------------------------------------

def _bound_value(name: str, g: Graph, param, active, W):
    n, m = g.n, g.m
    if name in ("sparsec_k", "sparsec_p") and active is None:
        raise ConfigError(f"{name} needs a deterministic --algo for its active edge sets")
    if name in ("sparsec_coro_k", "sparsec_coro_p", "densec_k", "densec_p") and W is None:
        raise ConfigError(f"{name} needs --W or --algo")
    table = {
        "sparse_k": lambda: bounds.sparse_bound_k(g, param),
        "dense_k": lambda: bounds.dense_bound_k(n, m, param),
        "sparsec_k": lambda: bounds.sparsec_bound_k(g, active, param),
        "sparsec_coro_k": lambda: bounds.sparsec_coro_bound_k(g, W, param),
        "densec_k": lambda: bounds.densec_bound_k(n, m, W, param),
        "sparse_p": lambda: bounds.sparse_bound_p(g, param),
        "dense_p": lambda: bounds.dense_bound_p(n, param),
        "sparsec_p": lambda: bounds.sparsec_bound_p(g, active, param),
        "sparsec_coro_p": lambda: bounds.sparsec_coro_bound_p(g, W, param),
        "densec_p": lambda: bounds.densec_bound_p(n, W, param),
    }
    b = table[name]()
    if isinstance(b, bounds.Bound):
        return b.value, b.hypothesis_ok
    return b, True


def _petrov_rows(max_n: int) -> list[BoundRow]:
    sweep = bounds.petrov_sweep(max_n)
    rows = [BoundRow("petrov", f"max_n={max_n},checked={sweep.checked},"
                     f"failures={len(sweep.failures)},equalities={len(sweep.equalities)}", None)]
    for kind, cases in (("equality", sweep.equalities), ("failure", sweep.failures)):
        for comp, m, lhs, rhs in cases:
            rows.append(BoundRow("petrov", f"blocks={'+'.join(map(str, comp))},m={m}",
                                 rhs, lhs, note=kind))
    return rows


def _rcase_rows(g: Graph, F, prof) -> list[BoundRow]:
    rb = bounds.rcase_bound(g, F)
    measured = None if prof is None else prof.leak(F)
    params = f"F={_fmt_F(F)}"
    rows = [BoundRow("rcase_hcomp", params, rb.h_comp, measured)]
    note = ""
    if abs(rb.printed - rb.h_comp) > verify.TOL:
        note = f"printed expression differs from H_comp by {rb.h_comp - rb.printed:.6f} bits"
        if measured is not None:
            note += f"; simulation gives {measured:.6f}"
        _note(f"rcase discrepancy on {g.label()} {params}: H_comp={rb.h_comp:.6f} "
              f"printed={rb.printed:.6f}" + ("" if measured is None else f" simulated={measured:.6f}"))
    rows.append(BoundRow("rcase_printed", params, rb.printed, measured, note=note))
    return rows


def cmd_bounds(args) -> int:
    names = args.theorem or list(THEOREMS)
    unknown = [t for t in names if t not in THEOREMS]
    if unknown:
        raise ConfigError(f"unknown theorem(s) {unknown}; expected one of {list(THEOREMS)}")
    rows: list[BoundRow] = []
    graph_needed = [t for t in names if t != "petrov"]
    if graph_needed:
        g = _graph(args)
        full = filt = active = None
        W = args.W
        if args.algo:
            algo, bits = make_algorithm(args.algo, g)
            full = ObservationProfile(algo, g, "full", bits)
            filt = full.with_mode("filtered")
            if bits == 0:
                active = [r.active_edges() for r in full.records]
            if W is None:
                W = worst_case_comm(algo, g, bits)
        ks = args.k if args.k else list(verify.KS)
        ps = args.p if args.p else list(verify.PS)
        for name in graph_needed:
            if name == "rcase":
                for text in args.F or [_fmt_F(g.edges)]:
                    rows += _rcase_rows(g, _parse_F(text, g), full)
                continue
            prof = filt if name in FILTERED else full
            for param in (ks if name in K_THEOREMS else ps):
                value, ok = _bound_value(name, g, param, active, W)
                measured = None
                if prof is not None:
                    measured = prof.avg_tuples(param) if name in K_THEOREMS else prof.expected_bernoulli(param)
                label = f"{'k' if name in K_THEOREMS else 'p'}={param}"
                if "coro" in name or "densec" in name:
                    label += f",W={W}"
                rows.append(BoundRow(name, label, value, measured, ok))
    if "petrov" in names:
        rows += _petrov_rows(args.max_n)
    _emit(args, render(rows, args.format, BOUND_HEADER))
    bad = [r for r in rows if not r.ok or r.note == "failure"]
    for r in bad:
        _note(f"violation: {r.theorem} {r.params} bound={r.bound_bits} measured={r.measured_bits}")
    return EXIT_INVARIANT if bad else EXIT_OK


# -- verify ---------------------------------------------------------------------------

def cmd_verify(args) -> int:
    graphs = verify.parse_family(args.family)
    if args.graph:
        graphs.append(load_graph(args.graph))
    algos = args.algo_list or list(verify.DEFAULT_ALGOS)
    summary = verify.run_suite(graphs, algos, petrov_max_n=args.max_n,
                               with_ramp=not args.no_ramp, with_bounds=not args.no_bounds)
    rows = [{"check": c, "passed": p, "failed": f} for c, (p, f) in sorted(summary.counts.items())]
    _emit(args, render(rows, args.format, ["check", "passed", "failed"]))
    for note in summary.notes:
        _note(note)
    for v in summary.violations:
        _note(f"violation: {v}")
    return EXIT_OK if summary.ok else EXIT_INVARIANT


# -- ramp -----------------------------------------------------------------------------

def cmd_ramp(args) -> int:
    if args.ramp_cmd == "build":
        j = packed_shamir(args.s, args.r, args.n, args.q)
        rep = verify_scheme(j, ramp_structure(args.s, args.r, args.n))
        if args.table:
            with open(args.table, "w") as fh:
                json.dump(j.to_obj(), fh, indent=1)
        ents = j.share_entropies()
        row = {"params": f"s={args.s},r={args.r},n={args.n},q={args.q}", "table_size": len(j.table),
               "secret_entropy_bits": j.secret_entropy(), "share_entropies_bits": ents,
               "share_entropy_sum": share_entropy_sum(j), "verified": rep.ok}
        if args.format == "csv":
            row["share_entropies_bits"] = ";".join(f"{h:.6f}" for h in ents)
        _emit(args, render([row], args.format))
        return EXIT_OK if rep.ok else EXIT_INVARIANT
    if args.ramp_cmd == "verify":
        try:
            with open(args.table) as fh:
                j = JointDistribution.from_obj(json.load(fh))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read scheme table: {exc}") from None
        rep = verify_scheme(j, ramp_structure(args.s, args.r, j.n))
        rows = [{"kind": "summary", "parties": "", "conditional_entropy": None, "ok": rep.ok}]
        rows += [{"kind": kind, "parties": "+".join(map(str, B)), "conditional_entropy": h, "ok": False}
                 for kind, B, h in rep.failures]
        _emit(args, render(rows, args.format, ["kind", "parties", "conditional_entropy", "ok"]))
        return EXIT_OK if rep.ok else EXIT_INVARIANT
    # bounds
    rows = [{"s": args.s, "r": args.r, "n": args.n,
             "share_size_lower_bound_bits": share_size_lower_bound(args.s, args.r, args.n)}]
    _emit(args, render(rows, args.format))
    return EXIT_OK


# -- parser ---------------------------------------------------------------------------

def _common(p: argparse.ArgumentParser, graph=True, algo=True):
    if graph:
        p.add_argument("--graph", help="graph file (JSON or edge list) or generator name, e.g. star:4")
    if algo:
        p.add_argument("--algo", help="algorithm spec NAME[:key=value,...]")
        p.add_argument("--mode", choices=MODES, default="full")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", type=int, default=2000)
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--config", help="JSON file of flag values; explicit flags win")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="orleak", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    parser.leaves = {}
    p = sub.add_parser("simulate", help="run one execution and dump its histories")
    _common(p)
    p.add_argument("--initiator", default=None, help="node holding input 1, or 'none' for I_0")
    p.add_argument("--tape-bits", type=int, default=None)
    p.set_defaults(func=cmd_simulate)
    parser.leaves[("simulate", None)] = p

    p = sub.add_parser("leakage", help="exact or sampled leakage")
    _common(p)
    p.add_argument("--F", action="append", help="eavesdropped edges 'u-v,...', '' or 'all'; repeatable")
    p.add_argument("--p", type=float, action="append", help="Bernoulli edge probability; repeatable")
    p.add_argument("--k", type=int, action="append", help="tuple length; repeatable")
    p.add_argument("--method", choices=("exact", "monte_carlo"), default="exact")
    p.set_defaults(func=cmd_leakage)
    parser.leaves[("leakage", None)] = p

    p = sub.add_parser("bounds", help="closed-form bounds against measured leakage")
    _common(p)
    p.add_argument("--theorem", action="append", help=f"one of {', '.join(THEOREMS)}; repeatable")
    p.add_argument("--F", action="append")
    p.add_argument("--p", type=float, action="append")
    p.add_argument("--k", type=int, action="append")
    p.add_argument("--W", type=int, default=None, help="worst-case communication (default: measured)")
    p.add_argument("--max-n", type=int, default=12, help="Petrov sweep size")
    p.set_defaults(func=cmd_bounds)
    parser.leaves[("bounds", None)] = p

    p = sub.add_parser("verify", help="invariant suite over a graph/algorithm family")
    _common(p, algo=False)
    p.add_argument("--family", default="default",
                   help="'default', 'atlas:N', generator names, comma separated")
    p.add_argument("--algo", dest="algo_list", action="append", help="algorithm spec; repeatable")
    p.add_argument("--max-n", type=int, default=12, help="Petrov sweep size (0 skips it)")
    p.add_argument("--no-ramp", action="store_true")
    p.add_argument("--no-bounds", action="store_true")
    p.set_defaults(func=cmd_verify)
    parser.leaves[("verify", None)] = p

    p = sub.add_parser("ramp", help="ramp secret-sharing schemes")
    rsub = p.add_subparsers(dest="ramp_cmd", required=True)
    b = rsub.add_parser("build", help="build and verify a packed Shamir scheme")
    for name in ("s", "r", "n", "q"):
        b.add_argument(name, type=int)
    b.add_argument("--table", help="also write the joint table as JSON")
    v = rsub.add_parser("verify", help="verify a JSON joint table as an (s, r, n) scheme")
    v.add_argument("s", type=int)
    v.add_argument("r", type=int)
    v.add_argument("--table", required=True)
    c = rsub.add_parser("bounds", help="share-size lower bound for a one-bit secret")
    for name in ("s", "r", "n"):
        c.add_argument(name, type=int)
    for q, name in ((b, "build"), (v, "verify"), (c, "bounds")):
        _common(q, graph=False, algo=False)
        parser.leaves[("ramp", name)] = q
    p.set_defaults(func=cmd_ramp)
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv) -> argparse.Namespace:
    """Parse once to find ``--config``, then again with its values as defaults."""
    args = parser.parse_args(argv)
    if not getattr(args, "config", None):
        return args
    try:
        with open(args.config) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {args.config}: {exc}") from None
    if not isinstance(cfg, dict):
        raise ConfigError("config file must hold a JSON object")
    cfg = {k.replace("-", "_"): v for k, v in cfg.items()}
    if args.command == "verify" and "algo" in cfg:
        cfg["algo_list"] = cfg.pop("algo")
    unknown = sorted(set(cfg) - set(vars(args)))
    if unknown:
        raise ConfigError(f"unknown config keys {unknown}")
    # set_defaults on the leaf subparser lets explicit flags win
    key = (args.command, getattr(args, "ramp_cmd", None))
    parser.leaves[key].set_defaults(**cfg)
    return parser.parse_args(argv)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
        return args.func(args)
    except (ConfigError, GraphError, AlgorithmSpecError, SchemeError) as exc:
        _note(f"error: {exc}")
        return EXIT_CONFIG
    except CutoffExceeded as exc:
        _note(f"cutoff: {exc}")
        return EXIT_CUTOFF
    except (NonTermination, TapeExhausted) as exc:
        _note(f"invariant violation: {exc}")
        return EXIT_INVARIANT
    except (ValueError, OSError) as exc:
        _note(f"error: {exc}")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
