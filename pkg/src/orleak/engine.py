"""Synchronous LOCAL-model execution.

Each round every live process receives what its neighbours sent in the
previous round, computes, and sends at most one message per neighbour.
A message is either ``None`` (the empty message) or a non-empty ``bytes``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Any, Iterable, Iterator, Mapping

from .graph import Edge, Graph, canon

Message = bytes | None
Tape = tuple[int, ...]


class NonTermination(RuntimeError):
    pass


class TapeExhausted(RuntimeError):
    pass


def read_bit(tape: Tape, pos: int) -> int:
    if pos >= len(tape):
        raise TapeExhausted(f"tape of {len(tape)} bits read at position {pos}")
    return tape[pos]


class Algorithm:
    """Per-node state machine run by :func:`run`.

    Subclasses must keep ``step`` a pure function of its arguments: return
    a fresh state rather than mutating the old one.
    """

    name = "algorithm"
    targets: frozenset[int] = frozenset()

    def init(self, node: int, graph: Graph, targets: frozenset[int], bit: int, tape: Tape) -> Any:
        raise NotImplementedError

    def step(self, state: Any, rnd: int, inbox: Mapping[int, Message]) -> tuple[Any, dict[int, Message]]:
        raise NotImplementedError

    def is_terminal(self, state: Any) -> bool:
        raise NotImplementedError

    def output(self, state: Any) -> int | None:
        """Output bit of a terminated process, ``None`` if it has none."""
        raise NotImplementedError

    def describe(self) -> str:
        return self.name


def single_initiator(n: int, u: int | None) -> tuple[int, ...]:
    """``I_u`` as a bit vector; ``u=None`` gives the all-zero input ``I_0``."""
    return tuple(1 if v == u else 0 for v in range(n))


def input_family(n: int) -> list[tuple[int, ...]]:
    return [single_initiator(n, None)] + [single_initiator(n, u) for u in range(n)]


def all_tapes(n: int, bits: int) -> Iterator[tuple[Tape, ...]]:
    """Every assignment of ``bits``-bit tapes to ``n`` nodes."""
    for flat in itertools.product((0, 1), repeat=n * bits):
        yield tuple(flat[i * bits:(i + 1) * bits] for i in range(n))


def _strip(seq):
    end = len(seq)
    while end and not seq[end - 1]:
        end -= 1
    return tuple(seq[:end])


@dataclass(frozen=True)
class ExecutionRecord:
    graph: Graph
    inputs: tuple[int, ...]
    tapes: tuple[Tape, ...]
    rounds: int
    sent: dict[tuple[int, int], tuple[Message, ...]]
    outputs: dict[int, int | None]
    terminated_at: dict[int, int]

    def _check(self, e: Edge) -> Edge:
        e = canon(*e)
        if not self.graph.has_edge(*e):
            raise KeyError(f"{e} is not an edge of the graph")
        return e

    def directed(self, u: int, v: int) -> tuple[Message, ...]:
        self._check((u, v))
        return self.sent[(u, v)]

    def history(self, e: Edge) -> tuple[tuple[Message, ...], tuple[Message, ...]]:
        """``(u->v, v->u)`` message sequences of length ``rounds``, ``u < v``."""
        u, v = self._check(e)
        return self.sent[(u, v)], self.sent[(v, u)]

    def prefix(self, e: Edge, k: int):
        a, b = self.history(e)
        pad = (None,) * max(0, k - self.rounds)
        return (a + pad)[:k], (b + pad)[:k]

    def card(self, e: Edge) -> int:
        a, b = self.history(e)
        return sum(m is not None for m in a) + sum(m is not None for m in b)

    def binary_filter(self, e: Edge) -> tuple[tuple[int, ...], tuple[int, ...]]:
        a, b = self.history(e)
        return tuple(int(m is not None) for m in a), tuple(int(m is not None) for m in b)

    def active_edges(self) -> tuple[Edge, ...]:
        return tuple(e for e in self.graph.edges if self.card(e) > 0)

    def comm_cost(self) -> int:
        return sum(self.card(e) for e in self.graph.edges)

    def observe(self, e: Edge, mode: str = "full"):
        """Canonical per-edge observation.

        Trailing empty messages are dropped, so two observations compare
        equal exactly when the infinite histories do.
        """
        if mode == "full":
            a, b = self.history(e)
            return _strip(a), _strip(b)
        if mode == "filtered":
            a, b = self.binary_filter(e)
            return _strip(a), _strip(b)
        if mode == "card":
            return self.card(e)
        raise ValueError(f"unknown observation mode {mode!r}")

    def to_obj(self) -> dict:
        """Dump with λ as ``null``; one record per directed edge and round."""
        records = []
        for u, v in self.graph.edges:
            for a, b in ((u, v), (v, u)):
                for k, msg in enumerate(self.sent[(a, b)], 1):
                    records.append({
                        "edge": [u, v],
                        "dir": f"{a}->{b}",
                        "round": k,
                        "payload_hex": None if msg is None else msg.hex(),
                    })
        return {
            "nodes": self.graph.n,
            "rounds": self.rounds,
            "inputs": list(self.inputs),
            "outputs": {str(v): o for v, o in sorted(self.outputs.items())},
            "terminated_at": {str(v): r for v, r in sorted(self.terminated_at.items())},
            "history": records,
        }


def run(algo: Algorithm, g: Graph, inputs: Iterable[int], tapes=None,
        max_rounds: int | None = None) -> ExecutionRecord:
    """Execute ``algo`` on ``g`` until every process has terminated."""
    inputs = tuple(inputs)
    if len(inputs) != g.n or any(b not in (0, 1) for b in inputs):
        raise ValueError("inputs must assign a bit to every node")
    if tapes is None:
        tapes = ((),) * g.n
    tapes = tuple(tuple(t) for t in tapes)
    if len(tapes) != g.n or len({len(t) for t in tapes}) > 1:
        raise ValueError("tapes must give every node a tape of the same length")
    if max_rounds is None:
        max_rounds = 4 * g.n
    if max_rounds < 1:
        raise ValueError("max_rounds must be positive")

    targets = frozenset(algo.targets)
    states = [algo.init(v, g, targets, inputs[v], tapes[v]) for v in range(g.n)]
    done_at: dict[int, int] = {v: 0 for v in range(g.n) if algo.is_terminal(states[v])}
    sent: dict[tuple[int, int], list[Message]] = {}
    for u, v in g.edges:
        sent[(u, v)] = []
        sent[(v, u)] = []

    rnd = 0
    while len(done_at) < g.n:
        rnd += 1
        if rnd > max_rounds:
            live = sorted(set(range(g.n)) - set(done_at))
            raise NonTermination(f"processes {live} still running after {max_rounds} rounds")
        outgoing: dict[tuple[int, int], Message] = {}
        for v in range(g.n):
            if v in done_at:
                continue
            inbox = {w: sent[(w, v)][-1] if rnd > 1 else None for w in g.neighbors(v)}
            states[v], outbox = algo.step(states[v], rnd, inbox)
            for w, msg in outbox.items():
                if not g.has_edge(v, w):
                    raise ValueError(f"process {v} sent to non-neighbour {w}")
                if msg is not None and (not isinstance(msg, bytes) or len(msg) == 0):
                    raise ValueError(f"process {v} sent an invalid message {msg!r}")
                outgoing[(v, w)] = msg
            if algo.is_terminal(states[v]):
                done_at[v] = rnd
        for key in sent:
            sent[key].append(outgoing.get(key))

    return ExecutionRecord(
        graph=g,
        inputs=inputs,
        tapes=tapes,
        rounds=rnd,
        sent={k: tuple(s) for k, s in sent.items()},
        outputs={v: algo.output(states[v]) for v in range(g.n)},
        terminated_at=done_at,
    )


def worst_case_comm(algo: Algorithm, g: Graph, tape_bits: int = 0, max_rounds=None) -> int:
    """Maximum message count over ``I_0``, every ``I_v`` and every tape."""
    return max(run(algo, g, inp, tapes, max_rounds).comm_cost()
               for inp in input_family(g.n)
               for tapes in all_tapes(g.n, tape_bits))


@dataclass(frozen=True)
class CorrectnessResult:
    ok: bool
    k0: int | None
    tape_bits: int
    witness: dict | None = None


def check_or_correctness(algo: Algorithm, g: Graph, targets=None, tape_bits: int = 0,
                         max_rounds=None) -> CorrectnessResult:
    """Run every input in the family with every tape; targets must output the OR.

    ``k0`` is the latest round at which any target terminated.
    """
    targets = frozenset(algo.targets if targets is None else targets)
    if not targets:
        raise ValueError("target set must be non-empty")
    k0 = 0
    for inp in input_family(g.n):
        want = int(any(inp))
        for tapes in all_tapes(g.n, tape_bits):
            try:
                rec = run(algo, g, inp, tapes, max_rounds)
            except NonTermination as exc:
                return CorrectnessResult(False, None, tape_bits,
                                         {"inputs": inp, "tapes": tapes, "error": str(exc)})
            for t in sorted(targets):
                if rec.outputs[t] != want:
                    return CorrectnessResult(False, None, tape_bits, {
                        "inputs": inp, "tapes": tapes, "node": t,
                        "output": rec.outputs[t], "expected": want})
                k0 = max(k0, rec.terminated_at[t])
    return CorrectnessResult(True, k0, tape_bits)
