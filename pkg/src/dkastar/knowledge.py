"""Domain knowledge: known edges, forbidden edges and tiers.

Knowledge is compiled into two masks per variable.  ``required[j]`` holds the
variables that must be parents of ``j``; ``banned[j]`` those that never may be.
A parent set ``S`` of ``j`` is allowed iff ``required[j] <= S`` and
``S & banned[j] == 0``.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .graph import Dag, is_acyclic, popcount


class KnowledgeError(ValueError):
    """Invalid or self-contradictory domain knowledge."""


@dataclass(frozen=True)
class Knowledge:
    """Validated domain knowledge over ``p`` variables (by index).

    ``forbidden`` pairs are stored as ``(min, max)``.  ``tiers`` is an ordered
    partition of some or all variables; variables absent from every tier are
    unconstrained by tiers.
    """

    p: int
    known: frozenset[tuple[int, int]] = frozenset()
    forbidden: frozenset[tuple[int, int]] = frozenset()
    tiers: tuple[tuple[int, ...], ...] | None = None
    names: tuple[str, ...] | None = None

    def __post_init__(self):
        p = self.p

        def label(i):
            return self.names[i] if self.names else str(i)

        for a, b in self.known:
            if not (0 <= a < p and 0 <= b < p) or a == b:
                raise KnowledgeError(f"invalid known edge ({label(a)}, {label(b)})")
        for a, b in self.forbidden:
            if not (0 <= a < b < p):
                raise KnowledgeError(f"invalid forbidden pair ({a}, {b})")
        for a, b in sorted(self.known):
            if (min(a, b), max(a, b)) in self.forbidden:
                raise KnowledgeError(
                    f"conflicting knowledge: {label(a)} -> {label(b)} is both known and forbidden")
        parents = [0] * p
        for a, b in self.known:
            parents[b] |= 1 << a
        if not is_acyclic(parents):
            raise KnowledgeError("known edges form a directed cycle")
        if self.tiers is not None:
            seen = set()
            for tier in self.tiers:
                for v in tier:
                    if not 0 <= v < p:
                        raise KnowledgeError(f"tier member {v} out of range")
                    if v in seen:
                        raise KnowledgeError(f"variable {label(v)} appears in more than one tier")
                    seen.add(v)
            tier = self.tier_index()
            for a, b in sorted(self.known):
                if tier[a] >= 0 and tier[b] >= 0 and tier[a] > tier[b]:
                    raise KnowledgeError(
                        f"conflicting knowledge: known edge {label(a)} -> {label(b)} "
                        "points from a later tier to an earlier one")

    @classmethod
    def empty(cls, p: int, names=None) -> "Knowledge":
        return cls(p, names=tuple(names) if names else None)

    @classmethod
    def build(cls, p: int, known: Iterable = (), forbidden: Iterable = (),
              tiers: Iterable[Iterable[int]] | None = None, names=None) -> "Knowledge":
        return cls(
            p,
            frozenset((int(a), int(b)) for a, b in known),
            frozenset((min(int(a), int(b)), max(int(a), int(b))) for a, b in forbidden),
            None if tiers is None else tuple(tuple(int(v) for v in t) for t in tiers),
            tuple(names) if names else None,
        )

    def is_empty(self) -> bool:
        return not self.known and not self.forbidden and not self.tiers

    def tier_index(self) -> np.ndarray:
        """Tier position per variable, ``-1`` for untiered variables."""
        out = np.full(self.p, -1, dtype=np.int64)
        for k, tier in enumerate(self.tiers or ()):
            for v in tier:
                out[v] = k
        return out

    def with_forbidden(self, pairs) -> "Knowledge":
        pairs = frozenset((min(a, b), max(a, b)) for a, b in pairs)
        return Knowledge(self.p, self.known, self.forbidden | pairs, self.tiers, self.names)

    def to_dict(self, names: Sequence[str]) -> dict:
        doc = {}
        if self.known:
            doc["known"] = [[names[a], names[b]] for a, b in sorted(self.known)]
        if self.forbidden:
            doc["forbidden"] = [[names[a], names[b]] for a, b in sorted(self.forbidden)]
        if self.tiers is not None:
            doc["tiers"] = [[names[v] for v in t] for t in self.tiers]
        return doc

    def dumps(self, names: Sequence[str]) -> str:
        return json.dumps(self.to_dict(names), indent=2, ensure_ascii=False) + "\n"


def parse_knowledge(json_text: str, names: Sequence[str]) -> Knowledge:
    """Resolve a knowledge document against variable ``names``."""
    try:
        doc = json.loads(json_text) if json_text.strip() else {}
    except json.JSONDecodeError as exc:
        raise KnowledgeError(f"malformed knowledge JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise KnowledgeError("knowledge JSON must be an object")
    unknown_keys = set(doc) - {"known", "forbidden", "tiers"}
    if unknown_keys:
        raise KnowledgeError(f"unknown knowledge keys: {sorted(unknown_keys)}")
    index = {n: i for i, n in enumerate(names)}

    def resolve(name):
        try:
            return index[name]
        except (KeyError, TypeError):
            raise KnowledgeError(f"unknown variable {name!r}") from None

    def pairs(key):
        out = []
        for item in doc.get(key, []):
            if not isinstance(item, (list, tuple)) or len(item) != 2:
                raise KnowledgeError(f"{key} entries must be [a, b] pairs, got {item!r}")
            out.append((resolve(item[0]), resolve(item[1])))
        return out

    known = pairs("known")
    forbidden = pairs("forbidden")
    for a, b in forbidden:
        if a == b:
            raise KnowledgeError(f"forbidden pair repeats {names[a]!r}")
    tiers = None
    if "tiers" in doc:
        tiers = [[resolve(v) for v in tier] for tier in doc["tiers"]]
    return Knowledge.build(len(names), known, forbidden, tiers, names)


@dataclass(frozen=True)
class AllowedSets:
    required: tuple[int, ...]
    banned: tuple[int, ...]

    @property
    def p(self) -> int:
        return len(self.required)

    def free(self, target: int) -> int:
        full = (1 << self.p) - 1
        return full & ~(1 << target) & ~self.required[target] & ~self.banned[target]


def compile_allowed(knowledge: Knowledge) -> AllowedSets:
    p = knowledge.p
    required = [0] * p
    banned = [0] * p
    for a, b in knowledge.known:
        required[b] |= 1 << a
        banned[a] |= 1 << b
    for a, b in knowledge.forbidden:
        banned[a] |= 1 << b
        banned[b] |= 1 << a
    if knowledge.tiers:
        tier = knowledge.tier_index()
        for i in range(p):
            if tier[i] < 0:
                continue
            for j in range(p):
                if tier[j] > tier[i]:
                    banned[i] |= 1 << j
    for j in range(p):
        assert required[j] & banned[j] == 0, "validated knowledge cannot clash here"
    return AllowedSets(tuple(required), tuple(banned))


def allowed(allowed_sets: AllowedSets, target: int, mask: int) -> bool:
    if mask >> target & 1:
        raise ValueError("target cannot be its own parent")
    req = allowed_sets.required[target]
    return mask & req == req and mask & allowed_sets.banned[target] == 0


def allowed_masks(allowed_sets: AllowedSets, target: int) -> np.ndarray:
    """Every allowed parent mask of ``target``, ascending."""
    free = [i for i in range(allowed_sets.p) if allowed_sets.free(target) >> i & 1]
    idx = np.arange(1 << len(free), dtype=np.int64)
    masks = np.full(idx.shape, allowed_sets.required[target], dtype=np.int64)
    for k, b in enumerate(free):
        masks |= ((idx >> k) & 1) << b
    return masks


def consistent_with(dag: Dag, knowledge: Knowledge) -> bool:
    """True iff every known edge is present, no forbidden pair is adjacent and
    no edge points from a later tier into an earlier one."""
    for a, b in knowledge.known:
        if not dag.has_edge(a, b):
            return False
    for a, b in knowledge.forbidden:
        if dag.adjacent(a, b):
            return False
    if knowledge.tiers:
        tier = knowledge.tier_index()
        for a, b in dag.edges():
            if tier[a] >= 0 and tier[b] >= 0 and tier[a] > tier[b]:
                return False
    return True


def known_edges_dag(knowledge: Knowledge) -> Dag:
    return Dag.from_edges(knowledge.p, knowledge.known)


# -- super-structure ---------------------------------------------------------

def merge_super_structure(knowledge: Knowledge, adjacency) -> Knowledge:
    """Forbid every pair absent from a symmetric super-structure adjacency."""
    adj = np.asarray(adjacency, dtype=bool)
    p = knowledge.p
    if adj.shape != (p, p):
        raise KnowledgeError(f"super-structure must be {p}x{p}, got {adj.shape}")
    if not np.array_equal(adj, adj.T):
        raise KnowledgeError("super-structure adjacency must be symmetric")
    if np.any(np.diag(adj)):
        raise KnowledgeError("super-structure adjacency must have a zero diagonal")
    absent = {(i, j) for i in range(p) for j in range(i + 1, p) if not adj[i, j]}
    for a, b in sorted(knowledge.known):
        if (min(a, b), max(a, b)) in absent:
            lab = knowledge.names or [str(i) for i in range(p)]
            raise KnowledgeError(
                f"known edge {lab[a]} -> {lab[b]} is absent from the super-structure")
    return knowledge.with_forbidden(absent)


def parse_super_structure(text: str, names: Sequence[str]) -> np.ndarray:
    """Read a super-structure as a CSV 0/1 matrix with names on both axes,
    or as JSON ``{"edges": [[a, b], ...]}``."""
    index = {n: i for i, n in enumerate(names)}
    p = len(names)
    adj = np.zeros((p, p), dtype=bool)
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            edges = json.loads(text)["edges"]
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise KnowledgeError(f"malformed super-structure JSON: {exc}") from None
        for a, b in edges:
            if a not in index or b not in index:
                raise KnowledgeError(f"super-structure edge references unknown variable: {a!r}, {b!r}")
            adj[index[a], index[b]] = adj[index[b], index[a]] = True
        return adj
    rows = [r for r in csv.reader(io.StringIO(text)) if r]
    header = [h.strip() for h in rows[0][1:]]
    if sorted(header) != sorted(names) or len(rows) - 1 != p:
        raise KnowledgeError("super-structure CSV must list exactly the dataset's variables")
    for row in rows[1:]:
        a = row[0].strip()
        if a not in index:
            raise KnowledgeError(f"unknown variable {a!r} in super-structure")
        for name, cell in zip(header, row[1:]):
            if cell.strip() not in ("0", "1"):
                raise KnowledgeError(f"super-structure cell ({a}, {name}) must be 0 or 1")
            adj[index[a], index[name]] = cell.strip() == "1"
    return adj


# -- evaluation counts -------------------------------------------------------

def tier_count_formula(p: int, sizes: Sequence[int]) -> int:
    """Regression count for a full tier partition with the given tier sizes.

    Every variable of tier ``k`` may not take parents from later tiers, so its
    lattice has ``2**(p - 1 - later)`` nodes; the last tier keeps the full one.
    """
    n = len(sizes)
    total = sizes[-1] * 2 ** (p - 1) if n else p * 2 ** (p - 1)
    for k in range(n - 1):
        total += sizes[k] * 2 ** (p - 1 - sum(sizes[k + 1:]))
    return total


def product_count(allowed_sets: AllowedSets) -> int:
    p = allowed_sets.p
    return sum(2 ** (p - 1 - popcount(allowed_sets.required[i]) - popcount(allowed_sets.banned[i]))
               for i in range(p))


def predicted_eval_count(p: int, knowledge: Knowledge | None = None) -> int:
    """Worst-case number of score evaluations implied by ``knowledge``."""
    k = knowledge
    if k is None or k.is_empty():
        return p * 2 ** (p - 1)
    has_tiers = bool(k.tiers)
    if not has_tiers and len(k.known) + len(k.forbidden) == 1:
        return (p - 1) * 2 ** (p - 1)
    if has_tiers and not k.known and not k.forbidden and sum(map(len, k.tiers)) == p:
        return tier_count_formula(p, [len(t) for t in k.tiers])
    return product_count(compile_allowed(k))
