"""Erdos-Renyi DAGs, linear Gaussian SEMs, and knowledge sampled from a true DAG.

Every function takes a ``seed`` accepted by :func:`numpy.random.default_rng`
(an int, a sequence of ints, a ``SeedSequence`` or a ``Generator``).  Benchmark
repeat ``r`` uses ``(base_seed, ..., r)`` so repeats are independent of the
order they run in.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .dataset import Dataset
from .graph import Dag, default_names, topological_order
from .knowledge import Knowledge

WEIGHT_RANGE = (0.2, 0.8)
NOISE_STD_RANGE = (1.0, 2.0)
DEFAULT_N = 500


class KnowledgeUnavailable(ValueError):
    """The true DAG offers nothing to sample for the requested knowledge kind."""


def rng_for(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def sample_er_dag(p: int, avg_degree: float, seed) -> Dag:
    if p < 2:
        raise ValueError("need at least two variables")
    if avg_degree < 0:
        raise ValueError("average degree must be non-negative")
    q = avg_degree / (p - 1)
    if q > 1:
        warnings.warn(f"edge probability {q:.3f} clamped to 1", stacklevel=2)
        q = 1.0
    rng = rng_for(seed)
    order = rng.permutation(p)
    draws = rng.random((p, p))
    parents = [0] * p
    for i in range(p):
        for j in range(i + 1, p):
            if draws[i, j] < q:
                parents[order[j]] |= 1 << int(order[i])
    return Dag(tuple(parents))


@dataclass(frozen=True, eq=False)
class SemModel:
    dag: Dag
    weights: np.ndarray  # weights[j, i] is the coefficient of x_j in x_i
    noise_std: np.ndarray

    def covariance(self) -> np.ndarray:
        """Analytic covariance (I - W)^-T D (I - W)^-1 with D = diag(sigma^2)."""
        p = self.dag.p
        inv = np.linalg.inv(np.eye(p) - self.weights)
        return inv.T @ np.diag(self.noise_std ** 2) @ inv


def sample_sem(dag: Dag, seed) -> SemModel:
    rng = rng_for(seed)
    p = dag.p
    w = np.zeros((p, p))
    lo, hi = WEIGHT_RANGE
    for a, b in dag.edges():
        mag = rng.uniform(lo, hi)
        w[a, b] = mag if rng.random() < 0.5 else -mag
    sigma = rng.uniform(*NOISE_STD_RANGE, size=p)
    return SemModel(dag, w, sigma)


def simulate(sem: SemModel, n: int = DEFAULT_N, seed=None) -> np.ndarray:
    """``n`` i.i.d. rows from the SEM, variables generated in topological order."""
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = rng_for(seed)
    p = sem.dag.p
    noise = rng.standard_normal((n, p)) * sem.noise_std
    x = np.zeros((n, p))
    for i in topological_order(sem.dag):
        x[:, i] = x @ sem.weights[:, i] + noise[:, i]
    return x


def simulate_dataset(sem: SemModel, n: int = DEFAULT_N, seed=None, names=None) -> Dataset:
    return Dataset.from_array(simulate(sem, n, seed), names or default_names(sem.dag.p))


KINDS = ("none", "known", "forbidden", "tiers")


def sample_knowledge(dag: Dag, kind: str, seed, names=None) -> Knowledge:
    """One piece of correct knowledge about ``dag``.

    ``known``: a uniformly drawn true edge.  ``forbidden``: a uniformly drawn
    nonadjacent pair.  ``tiers``: ``[{source}, rest, {sink}]`` with source and
    sink drawn from the DAG's in-degree-0 and out-degree-0 nodes.
    """
    rng = rng_for(seed)
    p = dag.p
    names = tuple(names) if names else None
    if kind == "none":
        return Knowledge.empty(p, names)
    if kind == "known":
        edges = dag.edges()
        if not edges:
            raise KnowledgeUnavailable("the DAG has no edges to sample a known edge from")
        return Knowledge.build(p, known=[edges[rng.integers(len(edges))]], names=names)
    if kind == "forbidden":
        pairs = [(a, b) for a in range(p) for b in range(a + 1, p) if not dag.adjacent(a, b)]
        if not pairs:
            raise KnowledgeUnavailable("every pair is adjacent; nothing to forbid")
        return Knowledge.build(p, forbidden=[pairs[rng.integers(len(pairs))]], names=names)
    if kind == "tiers":
        sources = [i for i in range(p) if dag.parents[i] == 0]
        has_child = 0
        for m in dag.parents:
            has_child |= m
        sinks = [i for i in range(p) if not has_child >> i & 1]
        if not sources or not sinks:
            raise KnowledgeUnavailable("the DAG lacks a source or a sink")
        src = sources[rng.integers(len(sources))]
        # an isolated node is both; the sink must differ from the source
        sinks = [s for s in sinks if s != src]
        if not sinks:
            raise KnowledgeUnavailable("no sink distinct from the sampled source")
        snk = sinks[rng.integers(len(sinks))]
        rest = [i for i in range(p) if i not in (src, snk)]
        return Knowledge.build(p, tiers=[[src], rest, [snk]], names=names)
    raise ValueError(f"unknown knowledge kind {kind!r}; expected one of {KINDS}")
