"""Pruned parent lattices and the subset-minimum DP over them."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _backend
from .dataset import Dataset
from .knowledge import AllowedSets, allowed_masks
from .scoring import ScoreTable

INFEASIBLE = math.inf


def compress(mask: int, x: int) -> int:
    """Drop bit ``x`` from ``mask`` (index into a lattice over the other p-1 variables)."""
    return (mask & ((1 << x) - 1)) | ((mask >> (x + 1)) << x)


def expand(cmask: int, x: int) -> int:
    return (cmask & ((1 << x) - 1)) | ((cmask >> x) << (x + 1))


@dataclass(frozen=True, eq=False)
class ParentLattice:
    """Best allowed parent set of ``target`` inside every candidate set.

    ``best[c]`` / ``best_set[c]`` are indexed by compressed candidate masks;
    ``best_set`` is ``-1`` where no allowed subset exists.
    """

    target: int
    p: int
    free_mask: int
    n_allowed: int
    best: np.ndarray
    best_set: np.ndarray

    def best_score(self, candidate_mask: int) -> tuple[float, int]:
        """``(score, parent_mask)`` of the best allowed subset of ``candidate_mask``.

        Returns ``(INFEASIBLE, -1)`` when a required parent is missing from
        the candidates.
        """
        if candidate_mask >> self.target & 1:
            raise ValueError("target cannot be a candidate parent of itself")
        c = compress(candidate_mask, self.target)
        s = int(self.best_set[c])
        if s < 0:
            return INFEASIBLE, -1
        return float(self.best[c]), expand(s, self.target)

    def unconstrained_best(self) -> float:
        """Best score with every other variable available (the heuristic term)."""
        return float(self.best[-1])


def build_lattice(dataset: Dataset, target: int, allowed_sets: AllowedSets,
                  score_table: ScoreTable, backend: str | None = None) -> ParentLattice:
    kernels = _backend.get(backend)
    p = dataset.p
    masks = allowed_masks(allowed_sets, target)
    low = (1 << target) - 1
    comp = (masks & low) | ((masks >> (target + 1)) << target)
    values = score_table.score_many(target, masks, comp)
    scores = np.full(1 << (p - 1), np.inf)
    scores[comp] = values
    best, best_set = kernels.subset_min(scores)
    return ParentLattice(target, p, allowed_sets.free(target), int(masks.shape[0]), best, best_set)


def best_score(lattice: ParentLattice, candidate_mask: int) -> tuple[float, int]:
    return lattice.best_score(candidate_mask)


def build_all(dataset: Dataset, allowed_sets: AllowedSets, score_table: ScoreTable,
              backend: str | None = None) -> list[ParentLattice]:
    return [build_lattice(dataset, x, allowed_sets, score_table, backend) for x in range(dataset.p)]
