import itertools

from hypothesis import strategies as st

from orleak.graph import Graph


@st.composite
def connected_graphs(draw, min_n=2, max_n=6):
    """Random tree on n nodes plus a random subset of the remaining pairs."""
    n = draw(st.integers(min_n, max_n))
    edges = {(draw(st.integers(0, v - 1)), v) for v in range(1, n)}
    rest = [e for e in itertools.combinations(range(n), 2) if e not in edges]
    extra = draw(st.lists(st.sampled_from(rest), unique=True, max_size=4)) if rest else []
    return Graph(n, tuple(edges | set(extra)))
