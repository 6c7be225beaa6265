"""A* over the order graph, returning the BIC-optimal DAG under domain knowledge.

A state is the set ``U`` of variables already placed in a topological order.
Placing ``x`` next costs the best score of ``x`` with parents drawn from
``U``; when a required parent of ``x`` is not yet in ``U`` that move does not
exist.  The heuristic lets every unplaced variable take its best allowed
parent set from all other variables, which never overestimates.
"""

from __future__ import annotations

import logging
import math
import time
import warnings
from dataclasses import dataclass

import numpy as np

from . import _backend
from .dataset import Dataset
from .frontier import Frontier, expand_policy
from .graph import Dag
from .knowledge import AllowedSets, Knowledge, compile_allowed, consistent_with
from .lattice import ParentLattice, build_all
from .scoring import ScoreTable

__all__ = ["DiscoveryResult", "astar_discover", "search_lattices", "Frontier", "expand_policy"]

log = logging.getLogger(__name__)

SOFT_MAX_VARS = 25


class ConstraintViolation(AssertionError):
    """A discovered graph broke a hard constraint (an internal bug, never user error)."""


@dataclass(frozen=True)
class DiscoveryResult:
    dag: Dag
    total_score: float
    eval_count: int
    expanded_nodes: int
    wall_time: float  # seconds
    order: tuple[int, ...] = ()

    @property
    def wall_time_ms(self) -> float:
        return self.wall_time * 1000.0


def search_lattices(lattices: list[ParentLattice], backend: str | None = None):
    """Run the order-graph A* on prebuilt lattices.

    Returns ``(dag, total_score, expanded_nodes, order)``.
    """
    kernels = _backend.get(backend)
    best = np.stack([lat.best for lat in lattices])
    best_set = np.stack([lat.best_set for lat in lattices])
    hbest = np.array([lat.unconstrained_best() for lat in lattices])
    order, parents, total, expanded = kernels.order_astar(best, best_set, hbest)
    dag = Dag(tuple(int(m) for m in parents))
    return dag, float(total), int(expanded), tuple(int(x) for x in order)


def check_constraints(dag: Dag, allowed_sets: AllowedSets, knowledge: Knowledge | None = None):
    for i, m in enumerate(dag.parents):
        req, ban = allowed_sets.required[i], allowed_sets.banned[i]
        if m & req != req or m & ban:
            raise ConstraintViolation(f"parent set of variable {i} violates the domain knowledge")
    if knowledge is not None and not consistent_with(dag, knowledge):
        raise ConstraintViolation("discovered DAG is inconsistent with the domain knowledge")


def astar_discover(dataset: Dataset, knowledge: Knowledge | None = None, *,
                   backend: str | None = None, table: ScoreTable | None = None) -> DiscoveryResult:
    """Globally BIC-optimal DAG among those consistent with ``knowledge``."""
    p = dataset.p
    if knowledge is None:
        knowledge = Knowledge.empty(p)
    if knowledge.p != p:
        raise ValueError(f"knowledge is over {knowledge.p} variables, dataset has {p}")
    if p > SOFT_MAX_VARS:
        warnings.warn(f"exact search over {p} variables needs 2^{p} states", stacklevel=2)
    t0 = time.perf_counter()
    allowed_sets = compile_allowed(knowledge)
    table = table if table is not None else ScoreTable(dataset, backend)
    before = table.eval_count
    lattices = build_all(dataset, allowed_sets, table, backend)
    dag, total, expanded, order = search_lattices(lattices, backend)
    wall = time.perf_counter() - t0
    check_constraints(dag, allowed_sets, knowledge)
    if not math.isfinite(total):
        raise ValueError("no DAG with a finite score satisfies the constraints")
    log.debug("p=%d evals=%d expanded=%d score=%.6f", p, table.eval_count - before, expanded, total)
    return DiscoveryResult(dag, total, table.eval_count - before, expanded, wall, order)
