"""Brute-force references for certifying the search on small problems."""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .dataset import Dataset
from .graph import Dag
from .knowledge import AllowedSets, Knowledge, allowed, compile_allowed
from .scoring import bic_score

MAX_EXHAUSTIVE_VARS = 5
MAX_SUBSET_VARS = 12


class OracleLimit(ValueError):
    pass


@lru_cache(maxsize=None)
def all_dags(p: int) -> np.ndarray:
    """Every DAG on ``p`` labelled nodes as rows of parent masks.

    Enumerates all ``2**(p*(p-1))`` parent-mask assignments and keeps the
    acyclic ones (vectorised Kahn elimination).  Rows are in lexicographic
    order of the mask tuple.
    """
    if p > MAX_EXHAUSTIVE_VARS:
        raise OracleLimit(f"exhaustive enumeration is limited to {MAX_EXHAUSTIVE_VARS} variables")
    if p == 0:
        return np.zeros((1, 0), dtype=np.int64)
    per = 1 << (p - 1)
    codes = np.arange(per ** p, dtype=np.int64)
    masks = np.empty((codes.shape[0], p), dtype=np.int64)
    for i in range(p):
        c = (codes // per ** (p - 1 - i)) % per
        low = (1 << i) - 1
        masks[:, i] = (c & low) | ((c >> i) << (i + 1))
    remaining = np.full(codes.shape[0], (1 << p) - 1, dtype=np.int64)
    for _ in range(p):
        free = np.zeros_like(remaining)
        for i in range(p):
            alive = (remaining >> i) & 1 == 1
            free |= np.where(alive & (masks[:, i] & remaining == 0), 1 << i, 0)
        remaining &= ~free
    out = masks[remaining == 0]
    out.flags.writeable = False
    return out


def local_score_table(dataset: Dataset) -> np.ndarray:
    """``table[i, c]`` = BIC of variable ``i`` with the parent set whose compressed mask is ``c``."""
    p = dataset.p
    table = np.empty((p, 1 << (p - 1)))
    for i in range(p):
        for c in range(1 << (p - 1)):
            full = (c & ((1 << i) - 1)) | ((c >> i) << (i + 1))
            table[i, c] = bic_score(dataset, i, full).value
    return table


def exhaustive_best_dag(dataset: Dataset, knowledge: Knowledge | None = None) -> tuple[Dag, float]:
    """Minimum-BIC DAG among all DAGs consistent with ``knowledge``.

    Ties prefer fewer edges, then the lexicographically smallest tuple of
    parent masks.
    """
    p = dataset.p
    if p > MAX_EXHAUSTIVE_VARS:
        raise OracleLimit(f"exhaustive search refuses p={p} > {MAX_EXHAUSTIVE_VARS}")
    knowledge = knowledge or Knowledge.empty(p)
    sets = compile_allowed(knowledge)
    dags = all_dags(p)
    scores = local_score_table(dataset)
    total = np.zeros(dags.shape[0])
    ok = np.ones(dags.shape[0], dtype=bool)
    n_edges = np.zeros(dags.shape[0], dtype=np.int64)
    for i in range(p):
        col = dags[:, i]
        req, ban = sets.required[i], sets.banned[i]
        ok &= (col & req == req) & (col & ban == 0)
        comp = (col & ((1 << i) - 1)) | ((col >> (i + 1)) << i)
        total += scores[i, comp]
        for b in range(p):
            n_edges += (col >> b) & 1
    total = np.where(ok, total, np.inf)
    # lexsort: last key is primary; rows are already in lexicographic mask order
    rank = np.lexsort((np.arange(dags.shape[0]), n_edges, total))
    best = rank[0]
    if not math.isfinite(total[best]):
        raise ValueError("no DAG satisfies the constraints")
    return Dag(tuple(int(m) for m in dags[best])), float(total[best])


def exhaustive_best_subset(dataset: Dataset, target: int, allowed_sets: AllowedSets,
                           candidate_mask: int) -> tuple[float, int]:
    """Direct scan of every subset of ``candidate_mask``; ``(inf, -1)`` if none is allowed."""
    if dataset.p > MAX_SUBSET_VARS:
        raise OracleLimit(f"subset scan is limited to {MAX_SUBSET_VARS} variables")
    best = (math.inf, 0, -1)
    sub = candidate_mask
    while True:
        if allowed(allowed_sets, target, sub):
            s = bic_score(dataset, target, sub).value
            key = (s, bin(sub).count("1"), sub)
            if math.isfinite(s) and key < best:
                best = key
        if sub == 0:
            break
        sub = (sub - 1) & candidate_mask
    return best[0], best[2]
