"""OR algorithms: tree convergecast, its thrifty variants, and target rebasing."""

from __future__ import annotations

from dataclasses import dataclass, replace

from .engine import Algorithm, read_bit
from .graph import Graph, SpanningTree, bfs_distances, spanning_tree

ONE = b"\x01"
ZERO = b"\x00"
DUMMY = b"\x02"


@dataclass(frozen=True)
class _Node:
    node: int
    parent: int | None
    deadline: int
    x: int
    done: bool = False
    out: int | None = None
    cover: int = 0


class Convergecast(Algorithm):
    """Each node ORs what it hears and reports to its parent at round ``n - depth``.

    ``mode`` picks what a non-root node sends at its deadline:

    ``"always"``  ``<x>`` unconditionally (the textbook schedule)
    ``"silent"``  ``<1>`` only when ``x = 1``; silence means 0
    ``"dummy"``   as silent, plus a dummy when ``x = 0`` and the tape bit is 1
    """

    def __init__(self, tree: SpanningTree, mode: str = "always"):
        if mode not in ("always", "silent", "dummy"):
            raise ValueError(f"unknown convergecast mode {mode!r}")
        self.tree = tree
        self.mode = mode
        self.targets = frozenset([tree.root])
        self.name = {"always": "convergecast", "silent": "silent", "dummy": "dummy"}[mode]

    def describe(self):
        return f"{self.name}:root={self.tree.root}"

    def init(self, node, graph, targets, bit, tape):
        cover = read_bit(tape, 0) if self.mode == "dummy" else 0
        return _Node(node, self.tree.parent.get(node), graph.n - self.tree.depth[node], bit,
                     cover=cover)

    def step(self, state, rnd, inbox):
        x = state.x
        if any(msg == ONE for msg in inbox.values()):
            x = 1
        state = replace(state, x=x)
        if rnd < state.deadline:
            return state, {}
        if state.parent is None:
            return replace(state, done=True, out=x), {}
        if self.mode == "always":
            msg = ONE if x else ZERO
        elif x:
            msg = ONE
        elif self.mode == "dummy" and state.cover:
            msg = DUMMY
        else:
            msg = None
        return replace(state, done=True), {state.parent: msg}

    def is_terminal(self, state):
        return state.done

    def output(self, state):
        return state.out


def convergecast(g: Graph, root: int = 0, tree: SpanningTree | None = None) -> Convergecast:
    return Convergecast(tree or spanning_tree(g, root), "always")


def silent_convergecast(g: Graph, root: int = 0, tree: SpanningTree | None = None) -> Convergecast:
    return Convergecast(tree or spanning_tree(g, root), "silent")


def dummy_convergecast(g: Graph, root: int = 0, tree: SpanningTree | None = None) -> Convergecast:
    """Silent convergecast with one tape bit of cover traffic per node."""
    return Convergecast(tree or spanning_tree(g, root), "dummy")


@dataclass(frozen=True)
class _Rebased:
    inner: object
    inner_done: bool
    dist: int
    is_target: bool
    s: int | None = None
    done: bool = False
    out: int | None = None


class Rebased(Algorithm):
    """Run ``inner`` through round ``k0``, then flood its result from the old targets.

    A node at hop distance ``d`` from the old target set forwards ``s`` to
    every neighbour in round ``k0 + 1 + d`` and terminates. The flood's
    schedule never depends on the inputs.
    """

    def __init__(self, inner: Algorithm, k0: int, new_targets, graph: Graph):
        new_targets = frozenset(new_targets)
        if not new_targets:
            raise ValueError("new target set must be non-empty")
        self.inner = inner
        self.k0 = k0
        self.targets = new_targets
        self.name = f"rebased({inner.name})"
        old = sorted(inner.targets)
        per_target = [bfs_distances(graph, t) for t in old]
        self._dist = [min(d[v] for d in per_target) for v in range(graph.n)]

    def describe(self):
        return f"rebased:inner={self.inner.describe()},targets={'+'.join(map(str, sorted(self.targets)))}"

    def init(self, node, graph, targets, bit, tape):
        st = self.inner.init(node, graph, self.inner.targets, bit, tape)
        return _Rebased(st, self.inner.is_terminal(st), self._dist[node], node in self.targets)

    def step(self, state, rnd, inbox):
        if rnd <= self.k0:
            if state.inner_done:
                return state, {}
            st, outbox = self.inner.step(state.inner, rnd, inbox)
            done = self.inner.is_terminal(st)
            s = self.inner.output(st) if done else None
            return replace(state, inner=st, inner_done=done, s=s), outbox
        s = state.s
        # round k0+1 still delivers inner traffic sent in round k0
        if s is None and rnd > self.k0 + 1:
            for msg in inbox.values():
                if msg is not None:
                    s = msg[0]
                    break
        if rnd < self.k0 + 1 + state.dist:
            return replace(state, s=s), {}
        if s is None:
            raise RuntimeError("flood reached a node without a value; k0 too small?")
        payload = ONE if s else ZERO
        node_out = s if state.is_target else None
        return replace(state, s=s, done=True, out=node_out), {w: payload for w in inbox}

    def is_terminal(self, state):
        return state.done

    def output(self, state):
        return state.out


def settle_round(algo: Algorithm, g: Graph, tape_bits: int = 0) -> int:
    """Latest round at which any process terminates, over the whole input family."""
    from .engine import all_tapes, input_family, run

    return max(run(algo, g, inp, tapes).rounds
               for inp in input_family(g.n) for tapes in all_tapes(g.n, tape_bits))


def rebase_target(inner: Algorithm, g: Graph, new_targets, k0: int | None = None,
                  tape_bits: int = 0) -> Rebased:
    if k0 is None:
        k0 = settle_round(inner, g, tape_bits)
    return Rebased(inner, k0, new_targets, g)


class DroppingConvergecast(Convergecast):
    """Convergecast whose process ``drop`` never sends anything. Not OR-correct."""

    def __init__(self, tree: SpanningTree, drop: int):
        super().__init__(tree, "always")
        self.drop = drop
        self.name = "faulty"

    def describe(self):
        return f"faulty:root={self.tree.root},drop={self.drop}"

    def step(self, state, rnd, inbox):
        state, outbox = super().step(state, rnd, inbox)
        if state.node == self.drop:
            outbox = {w: None for w in outbox}
        return state, outbox


class AlgorithmSpecError(ValueError):
    pass


TAPE_BITS = {"convergecast": 0, "silent": 0, "dummy": 1, "faulty": 0}


def parse_params(text: str) -> dict[str, str]:
    params = {}
    for item in filter(None, text.split(",")):
        key, sep, val = item.partition("=")
        if not sep:
            raise AlgorithmSpecError(f"parameter {item!r} is not key=value")
        params[key.strip()] = val.strip()
    return params


def make_algorithm(spec: str, g: Graph) -> tuple[Algorithm, int]:
    """Build an algorithm from ``NAME[:k=v,...]``; returns it with its tape length.

    ``convergecast``, ``silent`` and ``dummy`` take ``root``; ``faulty``
    also takes ``drop``; ``rebased`` takes ``inner`` (a plain name),
    ``targets`` (``+``-separated ids) and optionally ``root`` and ``k0``.
    """
    name, _, rest = spec.partition(":")
    name = name.strip()
    try:
        params = parse_params(rest)
        root = int(params.pop("root", 0))
        if not 0 <= root < g.n:
            raise AlgorithmSpecError(f"root {root} is not a node")
        tree = spanning_tree(g, root)
        if name in ("convergecast", "silent", "dummy"):
            mode = {"convergecast": "always"}.get(name, name)
            algo, bits = Convergecast(tree, mode), TAPE_BITS[name]
        elif name == "faulty":
            algo, bits = DroppingConvergecast(tree, int(params.pop("drop", g.n - 1))), 0
        elif name == "rebased":
            inner_name = params.pop("inner", "convergecast")
            inner, bits = make_algorithm(f"{inner_name}:root={root}", g)
            targets = [int(t) for t in params.pop("targets", str(g.n - 1)).split("+")]
            if any(not 0 <= t < g.n for t in targets):
                raise AlgorithmSpecError(f"targets {targets} are not all nodes")
            k0 = params.pop("k0", None)
            algo = rebase_target(inner, g, targets, None if k0 is None else int(k0), bits)
        else:
            raise AlgorithmSpecError(f"unknown algorithm {name!r}")
    except ValueError as exc:
        if isinstance(exc, AlgorithmSpecError):
            raise
        raise AlgorithmSpecError(f"bad algorithm spec {spec!r}: {exc}") from None
    if params:
        raise AlgorithmSpecError(f"unused parameters for {name}: {sorted(params)}")
    return algo, bits
