"""Anonymity leakage of distributed OR algorithms in the synchronous LOCAL model."""

from .graph import Graph, load_graph, named_graph
from .engine import Algorithm, ExecutionRecord, run
from .algorithms import make_algorithm
from .leakage import ObservationProfile

__all__ = ["Algorithm", "ExecutionRecord", "Graph", "ObservationProfile",
           "load_graph", "make_algorithm", "named_graph", "run"]
__version__ = "0.1.0"
