"""Underlying graphs and the combinatorial queries the leakage bounds need.

Nodes are dense integers ``0..n-1``; an edge is stored as ``(min, max)``.
External node names are mapped to ids at ingestion time.
"""

from __future__ import annotations

import itertools
import json
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

Edge = tuple[int, int]


class GraphError(ValueError):
    """Raised for malformed or disconnected graphs."""


def canon(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class Graph:
    n: int
    edges: tuple[Edge, ...]
    names: tuple[str, ...] | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.n < 1:
            raise GraphError("graph needs at least one node")
        seen = set()
        for u, v in self.edges:
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise GraphError(f"edge ({u}, {v}) has an endpoint outside 0..{self.n - 1}")
            if u == v:
                raise GraphError(f"self-loop at node {u}")
            e = canon(u, v)
            if e in seen:
                raise GraphError(f"duplicate edge {e}")
            seen.add(e)
        object.__setattr__(self, "edges", tuple(sorted(seen)))
        adj = [[] for _ in range(self.n)]
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        object.__setattr__(self, "_adj", tuple(tuple(sorted(a)) for a in adj))
        object.__setattr__(self, "_index", {e: i for i, e in enumerate(self.edges)})
        if len(components(self, self.edges)) != 1:
            raise GraphError("graph is not connected")

    @property
    def m(self) -> int:
        return len(self.edges)

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self._adj[v]

    def edge_index(self, e: Edge) -> int:
        try:
            return self._index[canon(*e)]
        except KeyError:
            raise KeyError(f"{tuple(e)} is not an edge of the graph") from None

    def has_edge(self, u: int, v: int) -> bool:
        return canon(u, v) in self._index

    def label(self) -> str:
        return f"n{self.n}:" + ",".join(f"{u}-{v}" for u, v in self.edges)


def edge_set(g: Graph, edges: Iterable[Sequence[int]]) -> tuple[Edge, ...]:
    """Canonical sorted tuple of edges of ``g``; rejects non-edges."""
    out = set()
    for e in edges:
        u, v = e
        if not g.has_edge(u, v):
            raise GraphError(f"({u}, {v}) is not an edge of the graph")
        out.add(canon(u, v))
    return tuple(sorted(out))


# -- queries -----------------------------------------------------------------

def bfs_distances(g: Graph, source: int) -> list[int]:
    dist = [-1] * g.n
    dist[source] = 0
    queue = deque([source])
    while queue:
        x = queue.popleft()
        for y in g.neighbors(x):
            if dist[y] < 0:
                dist[y] = dist[x] + 1
                queue.append(y)
    return dist


def all_pairs_distance(g: Graph) -> np.ndarray:
    """Hop-distance matrix, one BFS per node."""
    return np.array([bfs_distances(g, s) for s in range(g.n)], dtype=int)


def components(g: Graph, kept: Iterable[Edge]) -> list[frozenset[int]]:
    """Connected components of ``(V, kept)``, ordered by smallest member."""
    parent = list(range(g.n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for u, v in kept:
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[max(ru, rv)] = min(ru, rv)
    blocks: dict[int, set[int]] = {}
    for v in range(g.n):
        blocks.setdefault(find(v), set()).add(v)
    return sorted((frozenset(b) for b in blocks.values()), key=min)


def disc(g: Graph, u: int, v: int, free: Iterable[Edge] = ()) -> int:
    """Fewest non-free edges in any edge set connecting ``u`` and ``v``.

    0/1 BFS where free edges cost nothing; equals the hop distance when
    ``free`` is empty.
    """
    free = {canon(*e) for e in free}
    dist = [None] * g.n
    dist[u] = 0
    dq = deque([u])
    while dq:
        x = dq.popleft()
        for y in g.neighbors(x):
            w = 0 if canon(x, y) in free else 1
            nd = dist[x] + w
            if dist[y] is None or nd < dist[y]:
                dist[y] = nd
                if w == 0:
                    dq.appendleft(y)
                else:
                    dq.append(y)
    return dist[v]


@dataclass(frozen=True)
class SpanningTree:
    graph: Graph
    root: int
    parent: dict[int, int]
    depth: dict[int, int]

    @property
    def edges(self) -> tuple[Edge, ...]:
        return tuple(sorted(canon(c, p) for c, p in self.parent.items()))

    def children(self, v: int) -> list[int]:
        return sorted(c for c, p in self.parent.items() if p == v)

    def subtree(self, v: int) -> frozenset[int]:
        out = {v}
        stack = [v]
        while stack:
            x = stack.pop()
            for c in self.children(x):
                out.add(c)
                stack.append(c)
        return frozenset(out)


def spanning_tree(g: Graph, root: int = 0, strategy: str = "bfs") -> SpanningTree:
    """BFS spanning tree; neighbours are visited in increasing id order."""
    if strategy != "bfs":
        raise ValueError(f"unknown spanning tree strategy {strategy!r}")
    if not 0 <= root < g.n:
        raise ValueError(f"root {root} is not a node")
    parent: dict[int, int] = {}
    depth = {root: 0}
    queue = deque([root])
    while queue:
        x = queue.popleft()
        for y in g.neighbors(x):
            if y not in depth:
                depth[y] = depth[x] + 1
                parent[y] = x
                queue.append(y)
    return SpanningTree(g, root, parent, depth)


def is_connected_subset(g: Graph, nodes: Iterable[int]) -> bool:
    nodes = set(nodes)
    if not nodes:
        return False
    start = next(iter(nodes))
    seen = {start}
    stack = [start]
    while stack:
        x = stack.pop()
        for y in g.neighbors(x):
            if y in nodes and y not in seen:
                seen.add(y)
                stack.append(y)
    return seen == nodes


def connected_supersets(g: Graph, u: int, max_size: int) -> list[frozenset[int]]:
    """All ``U`` with ``u in U``, ``|U| <= max_size`` and ``G[U]`` connected."""
    if max_size < 1:
        raise ValueError("max_size must be at least 1")
    found = {frozenset([u])}
    frontier = [frozenset([u])]
    for _ in range(max_size - 1):
        grown = []
        for s in frontier:
            for x in s:
                for y in g.neighbors(x):
                    if y not in s:
                        t = s | {y}
                        if t not in found:
                            found.add(t)
                            grown.append(t)
        frontier = grown
    return sorted(found, key=lambda s: (len(s), sorted(s)))


# -- constructors and ingestion ------------------------------------------------

def path_graph(n: int) -> Graph:
    return Graph(n, tuple((i, i + 1) for i in range(n - 1)))


def cycle_graph(n: int) -> Graph:
    if n < 3:
        raise GraphError("a cycle needs at least 3 nodes")
    return Graph(n, tuple((i, (i + 1) % n) for i in range(n)))


def star_graph(n: int) -> Graph:
    """Star on ``n`` nodes, centre 0."""
    return Graph(n, tuple((0, i) for i in range(1, n)))


def complete_graph(n: int) -> Graph:
    return Graph(n, tuple(itertools.combinations(range(n), 2)))


GENERATORS = {
    "path": path_graph,
    "cycle": cycle_graph,
    "star": star_graph,
    "complete": complete_graph,
    "K": complete_graph,
}


def named_graph(spec: str) -> Graph:
    """Build a graph from ``"star:4"``, ``"K2"``, ``"cycle:5"`` and the like."""
    spec = spec.strip()
    if ":" in spec:
        kind, _, size = spec.partition(":")
    else:
        kind = spec.rstrip("0123456789")
        size = spec[len(kind):]
    if kind not in GENERATORS or not size.isdigit():
        raise GraphError(f"unknown graph name {spec!r}")
    return GENERATORS[kind](int(size))


def connected_atlas(max_n: int, min_n: int = 2) -> list[Graph]:
    """Every connected graph with ``min_n..max_n`` nodes, up to isomorphism."""
    from networkx.generators.atlas import graph_atlas_g

    if max_n > 7:
        raise ValueError("the graph atlas only covers up to 7 nodes")
    out = []
    for h in graph_atlas_g():
        k = h.number_of_nodes()
        if min_n <= k <= max_n and h.number_of_edges() >= k - 1:
            try:
                out.append(Graph(k, tuple(h.edges())))
            except GraphError:
                continue
    return out


def parse_edge_list(text: str) -> Graph:
    """Parse ``u v`` lines (``#`` starts a comment).

    Integer tokens are used as node ids directly; otherwise names are
    numbered in order of first appearance.
    """
    pairs = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise GraphError(f"line {lineno}: expected 'u v', got {raw!r}")
        pairs.append((parts[0], parts[1]))
    if not pairs:
        raise GraphError("edge list is empty")
    tokens = [t for p in pairs for t in p]
    if all(t.isdigit() for t in tokens):
        n = max(int(t) for t in tokens) + 1
        return Graph(n, tuple((int(a), int(b)) for a, b in pairs))
    ids: dict[str, int] = {}
    for t in tokens:
        ids.setdefault(t, len(ids))
    names = tuple(sorted(ids, key=ids.get))
    return Graph(len(ids), tuple((ids[a], ids[b]) for a, b in pairs), names=names)


def graph_from_obj(obj: dict) -> Graph:
    try:
        n = int(obj["nodes"])
        edges = tuple((int(u), int(v)) for u, v in obj["edges"])
    except (KeyError, TypeError, ValueError) as exc:
        raise GraphError(f"malformed graph object: {exc}") from None
    return Graph(n, edges)


def graph_to_obj(g: Graph) -> dict:
    return {"nodes": g.n, "edges": [list(e) for e in g.edges]}


def load_graph(path_or_name: str) -> Graph:
    """Load from a JSON object file, an edge-list file, or a generator name."""
    import os

    if not os.path.exists(path_or_name):
        return named_graph(path_or_name)
    with open(path_or_name) as fh:
        text = fh.read()
    if path_or_name.endswith(".json") or text.lstrip().startswith("{"):
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise GraphError(f"bad JSON graph: {exc}") from None
        return graph_from_obj(obj)
    return parse_edge_list(text)
