"""Exact A* causal discovery with expert domain knowledge."""

from ._backend import BACKEND
from .dataset import Dataset, load_csv
from .equivalence import dag_to_cpdag, meek_closure, shd, shd_scaled
from .graph import Cpdag, Dag
from .knowledge import Knowledge, compile_allowed, parse_knowledge
from .search import DiscoveryResult, astar_discover

__all__ = [
    "BACKEND", "Cpdag", "Dag", "Dataset", "DiscoveryResult", "Knowledge",
    "astar_discover", "compile_allowed", "dag_to_cpdag", "load_csv",
    "meek_closure", "parse_knowledge", "shd", "shd_scaled",
]
__version__ = "0.1.0"
