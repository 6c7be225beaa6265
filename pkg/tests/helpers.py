"""Independent reference implementations used only by tests."""

import itertools

import numpy as np

from dkastar.graph import DIRECTED, UNDIRECTED, Cpdag, Dag, is_acyclic, v_structures
from dkastar.knowledge import consistent_with


def naive_rss(x, target, parents):
    """Residual sum of squares of OLS with intercept on the raw data."""
    y = x[:, target]
    design = np.column_stack([np.ones(len(y))] + [x[:, j] for j in parents])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - design @ coef
    return float(resid @ resid)


def extensions(pdag: Cpdag, knowledge=None):
    """All DAGs orienting ``pdag``'s skeleton that keep its directed marks,
    have exactly the v-structures of its directed part, and satisfy knowledge."""
    p = pdag.p
    directed = pdag.directed_edges()
    undirected = pdag.undirected_edges()
    dir_parents = [0] * p
    for a, b in directed:
        dir_parents[b] |= 1 << a
    skeleton = pdag.skeleton()

    def vs_of(parents):
        out = set()
        for b in range(p):
            pa = [i for i in range(p) if parents[b] >> i & 1]
            for i, a in enumerate(pa):
                for c in pa[i + 1:]:
                    if (min(a, c), max(a, c)) not in skeleton:
                        out.add((a, b, c))
        return out

    wanted = vs_of(dir_parents)
    out = []
    for flips in itertools.product((False, True), repeat=len(undirected)):
        parents = list(dir_parents)
        for (a, b), f in zip(undirected, flips):
            if f:
                parents[a] |= 1 << b
            else:
                parents[b] |= 1 << a
        if not is_acyclic(parents) or vs_of(parents) != wanted:
            continue
        dag = Dag(tuple(parents))
        if knowledge is None or consistent_with(dag, knowledge):
            out.append(dag)
    return out


def compelled_marks(pdag: Cpdag, exts) -> np.ndarray:
    """Marks an edge directed iff every extension orients it the same way."""
    p = pdag.p
    m = np.zeros((p, p), dtype=np.int8)
    for a, b in pdag.skeleton():
        dirs = {g.has_edge(a, b) for g in exts}
        if dirs == {True}:
            m[a, b] = DIRECTED
        elif dirs == {False}:
            m[b, a] = DIRECTED
        else:
            m[a, b] = m[b, a] = UNDIRECTED
    return m


def mec_key(dag: Dag):
    skel = frozenset((min(a, b), max(a, b)) for a, b in dag.edges())
    return skel, frozenset(v_structures(dag))
