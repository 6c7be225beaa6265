"""Pure numpy/Python implementations of the hot kernels.

Same signatures and same arithmetic order as the compiled ``_kernels``
module, so the two backends agree to within a few ulps and make identical
decisions on non-degenerate data.
"""

import math

import numpy as np

from .frontier import Frontier

NAME = "python"

# relative pivot threshold below which a Gram submatrix counts as singular
SINGULAR_RTOL = 1e-10
RSS_FLOOR_RTOL = 1e-12


def _positions(masks, p, k):
    """(B, k) array with the ascending set-bit indices of each mask."""
    idx = np.zeros((masks.shape[0], k), dtype=np.int64)
    pos = np.zeros(masks.shape[0], dtype=np.int64)
    for j in range(p):
        has = ((masks >> j) & 1).astype(bool)
        if has.any():
            idx[has, pos[has]] = j
            pos[has] += 1
    return idx


def popcounts(masks):
    masks = np.asarray(masks, dtype=np.int64)
    out = np.zeros(masks.shape, dtype=np.int64)
    m = masks.copy()
    while np.any(m):
        out += m & 1
        m >>= 1
    return out


def _log(x):
    # libm log, as in the compiled kernel; numpy's SIMD log can differ by an ulp
    return np.fromiter(map(math.log, x), dtype=np.float64, count=x.shape[0])


def score_masks(gram, n_obs, target, masks):
    """BIC value and RSS of ``target`` regressed on each parent mask.

    Singular parent sets get value ``inf`` and rss ``inf``.
    """
    gram = np.ascontiguousarray(gram, dtype=np.float64)
    masks = np.asarray(masks, dtype=np.int64)
    p = gram.shape[0]
    n = float(n_obs)
    logn = math.log(n)
    s_tt = gram[target, target]
    floor = RSS_FLOOR_RTOL * max(s_tt, 1.0)
    values = np.empty(masks.shape[0])
    rss = np.empty(masks.shape[0])
    counts = popcounts(masks)
    for k in np.unique(counts):
        sel = np.flatnonzero(counts == k)
        k = int(k)
        if k == 0:
            r = np.full(sel.shape[0], max(s_tt, floor))
            rss[sel] = r
            values[sel] = n * _log(r / n)
            continue
        idx = _positions(masks[sel], p, k)
        g = gram[idx[:, :, None], idx[:, None, :]]
        c = gram[idx, target]
        b = sel.shape[0]
        low = np.zeros((b, k, k))
        singular = np.zeros(b, dtype=bool)
        for j in range(k):
            s = g[:, j, j].copy()
            for l in range(j):
                s -= low[:, j, l] * low[:, j, l]
            bad = (s <= SINGULAR_RTOL * g[:, j, j]) | (s <= 0.0)
            singular |= bad
            d = np.sqrt(np.where(bad, 1.0, s))
            low[:, j, j] = d
            for i in range(j + 1, k):
                s2 = g[:, i, j].copy()
                for l in range(j):
                    s2 -= low[:, i, l] * low[:, j, l]
                low[:, i, j] = s2 / d
        z = np.zeros((b, k))
        for j in range(k):
            s = c[:, j].copy()
            for l in range(j):
                s -= low[:, j, l] * z[:, l]
            z[:, j] = s / low[:, j, j]
        r = np.full(b, s_tt)
        for j in range(k):
            r -= z[:, j] * z[:, j]
        r = np.maximum(r, floor)
        v = k * logn + n * _log(r / n)
        v[singular] = math.inf
        r[singular] = math.inf
        values[sel] = v
        rss[sel] = r
    return values, rss


def subset_min(scores):
    """For every mask U: min over subsets S of U of ``scores[S]``.

    Ties prefer fewer elements, then the smaller mask.  Returns
    ``(best, best_set)`` with ``best_set == -1`` where no finite subset exists.
    """
    best = np.array(scores, dtype=np.float64)
    size = best.shape[0]
    m = size.bit_length() - 1
    universe = np.arange(size, dtype=np.int64)
    best_set = np.where(np.isfinite(best), universe, -1)
    card = popcounts(universe)
    best_card = np.where(best_set >= 0, card, 0)
    for j in range(m):
        hi = universe[(universe >> j) & 1 == 1]
        lo = hi ^ (1 << j)
        cs, cc, cm = best[lo], best_card[lo], best_set[lo]
        us, uc, um = best[hi], best_card[hi], best_set[hi]
        finite = cm >= 0
        better = finite & ((cs < us) | ((cs == us) & ((cc < uc) | ((cc == uc) & (cm < um)))))
        best[hi] = np.where(better, cs, us)
        best_card[hi] = np.where(better, cc, uc)
        best_set[hi] = np.where(better, cm, um)
    return best, best_set


def compress(subset, x):
    return (subset & ((1 << x) - 1)) | ((subset >> (x + 1)) << x)


def expand(cmask, x):
    return (cmask & ((1 << x) - 1)) | ((cmask >> x) << (x + 1))


def _h(subset, hbest, p):
    h = 0.0
    for x in range(p):
        if not subset >> x & 1:
            h += hbest[x]
    return h


def order_astar(best, best_set, hbest):
    """A* over variable subsets from the empty set to all variables.

    ``best[x, c]`` is the cost of placing ``x`` after the (compressed) candidate
    set ``c``.  Frontier order: smallest f, then largest g, then smallest subset.
    Returns ``(order, parent_masks, total, expanded)``.
    """
    best = np.asarray(best, dtype=np.float64)
    best_set = np.asarray(best_set, dtype=np.int64)
    hb = [float(v) for v in hbest]
    p = best.shape[0]
    if any(not math.isfinite(v) for v in hb):
        raise ValueError("some variable has no feasible parent set")
    full = (1 << p) - 1
    rows = [best[x].tolist() for x in range(p)]
    frontier = Frontier()
    frontier.push(0, 0.0, _h(0, hb, p))
    back = {}
    expanded = 0
    while True:
        item = frontier.pop()
        if item is None:
            raise ValueError("no DAG satisfies the constraints")
        u, g, _ = item
        expanded += 1
        if u == full:
            break
        for x in range(p):
            if u >> x & 1:
                continue
            cost = rows[x][compress(u, x)]
            if cost == math.inf:
                continue
            v = u | (1 << x)
            ng = g + cost
            if frontier.push(v, ng, _h(v, hb, p)):
                back[v] = (u, x)
    order = []
    parents = np.zeros(p, dtype=np.int64)
    u = full
    while u:
        prev, x = back[u]
        parents[x] = expand(int(best_set[x, compress(prev, x)]), x)
        order.append(x)
        u = prev
    order.reverse()
    return np.array(order, dtype=np.int64), parents, frontier.best_g[full], expanded
