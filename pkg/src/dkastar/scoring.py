"""BIC local scores with a per-variable cache and evaluation counter.

The score of variable ``t`` with parent set ``S`` is::

    k * ln(N) + N * ln(RSS / N),    k = |S|

where RSS is the residual sum of squares of the least-squares regression of
centered ``t`` on centered ``S`` (no intercept, since columns are centered).
Lower is better.  Singular parent sets score ``+inf``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _backend
from .dataset import Dataset


@dataclass(frozen=True)
class LocalScore:
    value: float
    rss: float
    k: int

    @property
    def finite(self) -> bool:
        return math.isfinite(self.value)


def _compress(mask: int, x: int) -> int:
    return (mask & ((1 << x) - 1)) | ((mask >> (x + 1)) << x)


class ScoreTable:
    """Cache of local scores keyed by (variable, parent mask).

    Each variable owns a dense slot array over its ``2**(p-1)`` candidate
    parent sets, allocated on first use; ``NaN`` marks "not yet regressed".
    ``eval_count`` counts regressions actually performed; a cache hit never
    increments it.
    """

    def __init__(self, dataset: Dataset, backend: str | None = None):
        self.dataset = dataset
        self.kernels = _backend.get(backend)
        self.per_variable = np.zeros(dataset.p, dtype=np.int64)
        self._values: list[np.ndarray | None] = [None] * dataset.p
        self._rss: list[np.ndarray | None] = [None] * dataset.p

    @property
    def eval_count(self) -> int:
        return int(self.per_variable.sum())

    def reset(self) -> None:
        self.per_variable[:] = 0
        self._values = [None] * self.dataset.p
        self._rss = [None] * self.dataset.p

    def _slots(self, target: int):
        if self._values[target] is None:
            size = 1 << (self.dataset.p - 1)
            self._values[target] = np.full(size, np.nan)
            self._rss[target] = np.full(size, np.nan)
        return self._values[target], self._rss[target]

    def score_many(self, target: int, masks, compressed=None) -> np.ndarray:
        """Values for many parent masks of ``target``; regresses only cache misses."""
        masks = np.asarray(masks, dtype=np.int64)
        if np.any((masks >> target) & 1):
            raise ValueError("target cannot be its own parent")
        if compressed is None:
            low = (1 << target) - 1
            compressed = (masks & low) | ((masks >> (target + 1)) << target)
        vals, rss = self._slots(target)
        missing = np.isnan(vals[compressed])
        if missing.any():
            pending = masks[missing]
            # duplicates in one request are regressed once
            pending, first = np.unique(pending, return_index=True)
            v, r = self.kernels.score_masks(self.dataset.gram, self.dataset.n_obs, target, pending)
            slot = compressed[missing][first]
            vals[slot] = v
            rss[slot] = r
            self.per_variable[target] += pending.shape[0]
        return vals[compressed]

    def local_score(self, target: int, mask: int) -> LocalScore:
        value = float(self.score_many(target, [mask])[0])
        rss = float(self._rss[target][_compress(mask, target)])
        return LocalScore(value, rss, bin(mask).count("1"))


def reset_counter(table: ScoreTable) -> None:
    table.reset()


def bic_score(dataset: Dataset, target: int, parents: int,
              table: ScoreTable | None = None) -> LocalScore:
    """Local BIC of ``target`` given the parent bitmask ``parents``.

    With a ``table`` the result is cached and counted there.
    """
    if dataset.n_obs < 2:
        raise ValueError("scoring needs at least two observations")
    if table is not None:
        return table.local_score(target, parents)
    v, r = _backend.kernels.score_masks(dataset.gram, dataset.n_obs, target,
                                        np.array([parents], dtype=np.int64))
    return LocalScore(float(v[0]), float(r[0]), bin(parents).count("1"))


def total_score(dataset: Dataset, parents, table: ScoreTable | None = None) -> float:
    """Sum of local scores over a DAG's parent masks, in variable order."""
    return float(sum(bic_score(dataset, i, int(m), table).value for i, m in enumerate(parents)))
