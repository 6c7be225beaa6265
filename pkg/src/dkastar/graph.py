"""Graph values shared by every other module.

A :class:`Dag` stores one parent bitmask per variable; a :class:`Cpdag` stores
an explicit edge mark for every ordered pair.  Both are immutable and carry no
variable names -- names live on the :class:`~dkastar.dataset.Dataset` and are
only attached at serialization time.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

MAX_VARS = 64

NONE = 0
DIRECTED = 1
UNDIRECTED = 2


class CycleError(ValueError):
    """Raised when a graph that must be acyclic is not."""


class GraphFormatError(ValueError):
    pass


def bits(mask: int) -> list[int]:
    """Indices of the set bits of ``mask``, ascending."""
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def popcount(mask: int) -> int:
    return bin(mask).count("1")


def mask_of(indices: Iterable[int]) -> int:
    m = 0
    for i in indices:
        m |= 1 << int(i)
    return m


def is_acyclic(parents: Sequence[int]) -> bool:
    """Kahn elimination on bitmasks: repeatedly drop nodes with no remaining parents."""
    remaining = (1 << len(parents)) - 1
    while remaining:
        free = 0
        for i in bits(remaining):
            if parents[i] & remaining == 0:
                free |= 1 << i
        if not free:
            return False
        remaining &= ~free
    return True


@dataclass(frozen=True)
class Dag:
    parents: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "parents", tuple(int(m) for m in self.parents))
        p = len(self.parents)
        if p > MAX_VARS:
            raise ValueError(f"at most {MAX_VARS} variables are supported, got {p}")
        full = (1 << p) - 1
        for i, m in enumerate(self.parents):
            if m < 0 or m & ~full:
                raise ValueError(f"parent mask of node {i} references unknown variables")
            if m >> i & 1:
                raise ValueError(f"self-loop on node {i}")
        if not is_acyclic(self.parents):
            raise CycleError("parent masks contain a directed cycle")

    @property
    def p(self) -> int:
        return len(self.parents)

    @classmethod
    def empty(cls, p: int) -> "Dag":
        return cls((0,) * p)

    @classmethod
    def from_edges(cls, p: int, edges: Iterable[tuple[int, int]]) -> "Dag":
        parents = [0] * p
        for a, b in edges:
            parents[b] |= 1 << a
        return cls(tuple(parents))

    def edges(self) -> list[tuple[int, int]]:
        return sorted((a, b) for b in range(self.p) for a in bits(self.parents[b]))

    def has_edge(self, a: int, b: int) -> bool:
        return bool(self.parents[b] >> a & 1)

    def adjacent(self, a: int, b: int) -> bool:
        return self.has_edge(a, b) or self.has_edge(b, a)

    def n_edges(self) -> int:
        return sum(popcount(m) for m in self.parents)


def topological_order(dag: Dag | Sequence[int]) -> list[int]:
    """Smallest-index-first Kahn order; raises :class:`CycleError` on a cycle."""
    parents = dag.parents if isinstance(dag, Dag) else tuple(dag)
    p = len(parents)
    placed = 0
    order = []
    while len(order) < p:
        for i in range(p):
            if not placed >> i & 1 and parents[i] & ~placed == 0:
                order.append(i)
                placed |= 1 << i
                break
        else:
            raise CycleError("no topological order exists")
    return order


def v_structures(dag: Dag) -> set[tuple[int, int, int]]:
    """Unshielded colliders ``a -> b <- c`` as triples ``(a, b, c)`` with ``a < c``."""
    out = set()
    for b in range(dag.p):
        pa = bits(dag.parents[b])
        for i, a in enumerate(pa):
            for c in pa[i + 1:]:
                if not dag.adjacent(a, c):
                    out.add((a, b, c))
    return out


class Cpdag:
    """Mixed graph with one mark per ordered pair.

    ``marks[i, j] == DIRECTED`` means ``i -> j``; ``UNDIRECTED`` is stored on
    both ``(i, j)`` and ``(j, i)``.
    """

    __slots__ = ("marks",)

    def __init__(self, marks):
        m = np.array(marks, dtype=np.int8)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("marks must be a square matrix")
        p = m.shape[0]
        if p > MAX_VARS:
            raise ValueError(f"at most {MAX_VARS} variables are supported, got {p}")
        if np.any(np.diag(m) != NONE):
            raise ValueError("self-loops are not allowed")
        und = m == UNDIRECTED
        if not np.array_equal(und, und.T):
            raise ValueError("undirected marks must be symmetric")
        d = m == DIRECTED
        if np.any(d & (m.T != NONE)):
            raise ValueError("a directed edge must have no reverse mark")
        if not is_acyclic([mask_of(np.flatnonzero(d[:, j])) for j in range(p)]):
            raise CycleError("directed part of the CPDAG has a cycle")
        m.flags.writeable = False
        self.marks = m

    @property
    def p(self) -> int:
        return self.marks.shape[0]

    @classmethod
    def from_dag(cls, dag: Dag) -> "Cpdag":
        """Fully directed mixed graph with the DAG's edges (no equivalence reasoning)."""
        m = np.zeros((dag.p, dag.p), dtype=np.int8)
        for a, b in dag.edges():
            m[a, b] = DIRECTED
        return cls(m)

    def mark(self, i: int, j: int) -> int:
        return int(self.marks[i, j])

    def adjacent(self, i: int, j: int) -> bool:
        return self.marks[i, j] != NONE or self.marks[j, i] != NONE

    def directed_edges(self) -> list[tuple[int, int]]:
        return [(int(a), int(b)) for a, b in zip(*np.nonzero(self.marks == DIRECTED))]

    def undirected_edges(self) -> list[tuple[int, int]]:
        a, b = np.nonzero(np.triu(self.marks == UNDIRECTED))
        return [(int(i), int(j)) for i, j in zip(a, b)]

    def skeleton(self) -> frozenset[tuple[int, int]]:
        adj = (self.marks != NONE) | (self.marks.T != NONE)
        a, b = np.nonzero(np.triu(adj))
        return frozenset((int(i), int(j)) for i, j in zip(a, b))

    def __eq__(self, other):
        return isinstance(other, Cpdag) and np.array_equal(self.marks, other.marks)

    def __hash__(self):
        return hash(self.marks.tobytes())

    def __repr__(self):
        parts = [f"{a}->{b}" for a, b in self.directed_edges()]
        parts += [f"{a}--{b}" for a, b in self.undirected_edges()]
        return f"Cpdag(p={self.p}, {', '.join(parts) or 'empty'})"


# -- serialization -----------------------------------------------------------

def default_names(p: int) -> list[str]:
    return [f"x{i + 1}" for i in range(p)]


def graph_to_dict(graph: Dag | Cpdag, names: Sequence[str]) -> dict:
    if len(names) != graph.p:
        raise ValueError(f"expected {graph.p} names, got {len(names)}")
    if isinstance(graph, Dag):
        edges = [{"from": names[a], "to": names[b], "mark": "directed"} for a, b in graph.edges()]
        kind = "dag"
    else:
        edges = [{"from": names[a], "to": names[b], "mark": "directed"}
                 for a, b in sorted(graph.directed_edges())]
        edges += [{"from": names[a], "to": names[b], "mark": "undirected"}
                  for a, b in graph.undirected_edges()]
        kind = "cpdag"
    return {"type": kind, "variables": list(names), "edges": edges}


def dumps_graph(graph: Dag | Cpdag, names: Sequence[str]) -> str:
    return json.dumps(graph_to_dict(graph, names), indent=2, ensure_ascii=False) + "\n"


def loads_graph(text: str) -> tuple[list[str], Dag | Cpdag]:
    """Parse graph JSON.

    A document typed ``"dag"`` (or untyped with only directed, acyclic edges)
    becomes a :class:`Dag`; anything else becomes a :class:`Cpdag`.
    """
    try:
        doc = json.loads(text)
        names = [str(v) for v in doc["variables"]]
        raw = doc.get("edges", [])
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise GraphFormatError(f"malformed graph JSON: {exc}") from None
    if len(set(names)) != len(names):
        raise GraphFormatError("duplicate variable names")
    index = {n: i for i, n in enumerate(names)}
    p = len(names)
    m = np.zeros((p, p), dtype=np.int8)
    for e in raw:
        try:
            a, b = index[e["from"]], index[e["to"]]
        except KeyError as exc:
            raise GraphFormatError(f"edge references unknown variable {exc}") from None
        mark = e.get("mark", "directed")
        if a == b:
            raise GraphFormatError(f"self-loop on {names[a]}")
        if m[a, b] != NONE or m[b, a] != NONE:
            raise GraphFormatError(f"duplicate edge between {names[a]} and {names[b]}")
        if mark == "directed":
            m[a, b] = DIRECTED
        elif mark == "undirected":
            m[a, b] = m[b, a] = UNDIRECTED
        else:
            raise GraphFormatError(f"unknown edge mark {mark!r}")
    kind = doc.get("type")
    only_directed = not np.any(m == UNDIRECTED)
    if kind == "dag" or (kind is None and only_directed):
        if not only_directed:
            raise GraphFormatError("a DAG cannot contain undirected edges")
        parents = tuple(mask_of(np.flatnonzero(m[:, j] == DIRECTED)) for j in range(p))
        if not is_acyclic(parents):
            if kind == "dag":
                raise CycleError("graph typed 'dag' contains a cycle")
        else:
            return names, Dag(parents)
    return names, Cpdag(m)


def to_dot(graph: Dag | Cpdag, names: Sequence[str]) -> str:
    lines = ["digraph G {"]
    for n in names:
        lines.append(f'  "{n}";')
    if isinstance(graph, Dag):
        directed, undirected = graph.edges(), []
    else:
        directed, undirected = sorted(graph.directed_edges()), graph.undirected_edges()
    for a, b in directed:
        lines.append(f'  "{names[a]}" -> "{names[b]}";')
    for a, b in undirected:
        lines.append(f'  "{names[a]}" -> "{names[b]}" [dir=none];')
    lines.append("}")
    return "\n".join(lines) + "\n"
