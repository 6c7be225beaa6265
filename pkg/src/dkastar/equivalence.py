"""DAG -> CPDAG, Meek's orientation rules with background knowledge, and SHD."""

from __future__ import annotations

import numpy as np

from .graph import DIRECTED, NONE, UNDIRECTED, CycleError, Cpdag, Dag, v_structures
from .knowledge import Knowledge, KnowledgeError


class _Pdag:
    """Mutable working copy: parent/child/undirected-neighbour sets."""

    def __init__(self, p: int):
        self.p = p
        self.pa = [set() for _ in range(p)]
        self.ch = [set() for _ in range(p)]
        self.und = [set() for _ in range(p)]

    @classmethod
    def from_cpdag(cls, cpdag: Cpdag) -> "_Pdag":
        g = cls(cpdag.p)
        for a, b in cpdag.directed_edges():
            g.pa[b].add(a)
            g.ch[a].add(b)
        for a, b in cpdag.undirected_edges():
            g.und[a].add(b)
            g.und[b].add(a)
        return g

    def adj(self, a: int, b: int) -> bool:
        return b in self.und[a] or b in self.pa[a] or b in self.ch[a]

    def orient(self, a: int, b: int) -> None:
        """Turn ``a - b`` into ``a -> b``."""
        self.und[a].discard(b)
        self.und[b].discard(a)
        self.pa[b].add(a)
        self.ch[a].add(b)

    def to_cpdag(self) -> Cpdag:
        m = np.zeros((self.p, self.p), dtype=np.int8)
        for b in range(self.p):
            for a in self.pa[b]:
                m[a, b] = DIRECTED
            for a in self.und[b]:
                m[a, b] = UNDIRECTED
        return Cpdag(m)


def _rule1(g: _Pdag) -> bool:
    # a -> b - c, a and c nonadjacent  =>  b -> c
    for b in range(g.p):
        for c in sorted(g.und[b]):
            if any(not g.adj(a, c) for a in g.pa[b]):
                g.orient(b, c)
                return True
    return False


def _rule2(g: _Pdag) -> bool:
    # a -> b -> c, a - c  =>  a -> c
    for a in range(g.p):
        for c in sorted(g.und[a]):
            if g.ch[a] & g.pa[c]:
                g.orient(a, c)
                return True
    return False


def _rule3(g: _Pdag) -> bool:
    # a - c -> b, a - d -> b, c and d nonadjacent, a - b  =>  a -> b
    for a in range(g.p):
        for b in sorted(g.und[a]):
            cands = sorted(g.und[a] & g.pa[b])
            for i, c in enumerate(cands):
                if any(not g.adj(c, d) for d in cands[i + 1:]):
                    g.orient(a, b)
                    return True
    return False


def _rule4(g: _Pdag) -> bool:
    # a - b, a - c, c -> d -> b, c and b nonadjacent  =>  a -> b
    for a in range(g.p):
        for b in sorted(g.und[a]):
            for d in g.pa[b]:
                for c in g.pa[d]:
                    if c in g.und[a] and c != b and not g.adj(c, b):
                        g.orient(a, b)
                        return True
    return False


_RULES = (_rule1, _rule2, _rule3, _rule4)


def _close(g: _Pdag, rules) -> None:
    changed = True
    while changed:
        changed = False
        for rule in rules:
            while rule(g):
                changed = True


def dag_to_cpdag(dag: Dag) -> Cpdag:
    """Markov-equivalence-class representative: compelled edges directed."""
    g = _Pdag(dag.p)
    for a, b in dag.edges():
        g.und[a].add(b)
        g.und[b].add(a)
    for a, b, c in v_structures(dag):
        for x in (a, c):
            if b in g.und[x]:
                g.orient(x, b)
    _close(g, _RULES[:3])
    return g.to_cpdag()


def meek_closure(cpdag: Cpdag, knowledge: Knowledge | None = None) -> Cpdag:
    """Inject knowledge orientations into ``cpdag`` and re-close under R1-R4.

    Known edges are oriented as given; undirected edges between two tiered
    variables in different tiers point from the earlier tier to the later one.
    Raises :class:`KnowledgeError` if the graph contradicts the knowledge.
    """
    g = _Pdag.from_cpdag(cpdag)
    if knowledge is not None and not knowledge.is_empty():
        if knowledge.p != cpdag.p:
            raise KnowledgeError(f"knowledge is over {knowledge.p} variables, graph has {cpdag.p}")
        lab = knowledge.names or [str(i) for i in range(cpdag.p)]
        for a, b in sorted(knowledge.known):
            if b in g.und[a]:
                g.orient(a, b)
            elif b not in g.ch[a]:
                raise KnowledgeError(f"known edge {lab[a]} -> {lab[b]} is not in the graph")
        for a, b in sorted(knowledge.forbidden):
            if g.adj(a, b):
                raise KnowledgeError(f"forbidden pair {lab[a]} - {lab[b]} is adjacent in the graph")
        if knowledge.tiers:
            tier = knowledge.tier_index()
            for a in range(g.p):
                for b in sorted(g.und[a]):
                    if tier[a] >= 0 and tier[b] >= 0 and tier[a] < tier[b]:
                        g.orient(a, b)
                for b in g.pa[a]:
                    if tier[a] >= 0 and tier[b] >= 0 and tier[b] > tier[a]:
                        raise KnowledgeError(
                            f"edge {lab[b]} -> {lab[a]} points from a later tier to an earlier one")
    _close(g, _RULES)
    try:
        return g.to_cpdag()
    except CycleError:
        raise KnowledgeError("knowledge orientations create a directed cycle") from None


def modified_cpdag(dag: Dag, knowledge: Knowledge | None = None) -> Cpdag:
    return meek_closure(dag_to_cpdag(dag), knowledge)


def _check_same_shape(a: Cpdag, b: Cpdag) -> None:
    if a.p != b.p:
        raise ValueError(f"graphs have different sizes: {a.p} vs {b.p}")


def shd(a: Cpdag, b: Cpdag) -> int:
    """Unordered pairs whose edge marks differ (absent / undirected / either direction)."""
    _check_same_shape(a, b)
    diff = (a.marks != b.marks) | (a.marks.T != b.marks.T)
    return int(np.triu(diff, 1).sum())


def shd_scaled(a: Cpdag, b: Cpdag) -> float:
    p = a.p
    pairs = p * (p - 1) / 2
    return shd(a, b) / pairs if pairs else 0.0


__all__ = ["dag_to_cpdag", "meek_closure", "modified_cpdag", "shd", "shd_scaled",
           "NONE", "DIRECTED", "UNDIRECTED"]
