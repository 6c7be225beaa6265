import itertools
from collections import defaultdict

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dkastar.equivalence import _RULES, _Pdag, _close, dag_to_cpdag, meek_closure, modified_cpdag, shd, shd_scaled
from dkastar.graph import DIRECTED, NONE, UNDIRECTED, Cpdag, Dag, is_acyclic, v_structures
from dkastar.knowledge import Knowledge, KnowledgeError
from dkastar.oracle import all_dags
from dkastar.synthgen import KINDS, KnowledgeUnavailable, sample_er_dag, sample_knowledge

from helpers import compelled_marks, extensions, mec_key


def pdag(p, directed=(), undirected=()):
    m = np.zeros((p, p), dtype=np.int8)
    for a, b in directed:
        m[a, b] = DIRECTED
    for a, b in undirected:
        m[a, b] = m[b, a] = UNDIRECTED
    return Cpdag(m)


def test_chain_is_fully_undirected():
    c = dag_to_cpdag(Dag.from_edges(3, [(0, 1), (1, 2)]))
    assert c.undirected_edges() == [(0, 1), (1, 2)] and not c.directed_edges()


def test_collider_is_compelled():
    c = dag_to_cpdag(Dag.from_edges(3, [(0, 1), (2, 1)]))
    assert sorted(c.directed_edges()) == [(0, 1), (2, 1)] and not c.undirected_edges()


def test_rule1_propagates_below_collider():
    c = dag_to_cpdag(Dag.from_edges(4, [(0, 2), (1, 2), (2, 3)]))
    assert sorted(c.directed_edges()) == [(0, 2), (1, 2), (2, 3)]


def test_known_edge_orients_chain():
    c = dag_to_cpdag(Dag.from_edges(3, [(0, 1), (1, 2)]))
    closed = meek_closure(c, Knowledge.build(3, known=[(0, 1)]))
    assert sorted(closed.directed_edges()) == [(0, 1), (1, 2)]


def test_idempotent():
    for seed in range(50):
        c = dag_to_cpdag(sample_er_dag(6, 2.5, seed))
        assert meek_closure(c) == c
        assert meek_closure(meek_closure(c)) == meek_closure(c)


def test_mec_grouping_p4():
    groups = defaultdict(set)
    for row in all_dags(4):
        dag = Dag(tuple(int(m) for m in row))
        groups[dag_to_cpdag(dag)].add(mec_key(dag))
    assert all(len(keys) == 1 for keys in groups.values())
    assert len(groups) == 185
    assert len({k for keys in groups.values() for k in keys}) == 185


@pytest.mark.parametrize("p", [3, 4])
def test_cpdag_marks_equal_compelled_edges(p):
    for row in all_dags(p):
        c = dag_to_cpdag(Dag(tuple(int(m) for m in row)))
        assert np.array_equal(c.marks, compelled_marks(c, extensions(c)))


def test_rule3_configuration():
    a, b, c, d = range(4)
    g = pdag(4, directed=[(c, b), (d, b)], undirected=[(a, b), (a, c), (a, d)])
    closed = meek_closure(g)
    assert closed.mark(a, b) == DIRECTED
    assert np.array_equal(closed.marks, compelled_marks(g, extensions(g)))


def test_rule4_configuration_needs_rule4():
    a, b, c, d = range(4)
    g = pdag(4, directed=[(c, d), (d, b)], undirected=[(a, b), (a, c), (a, d)])
    work = _Pdag.from_cpdag(g)
    _close(work, _RULES[:3])
    assert work.to_cpdag().mark(a, b) == UNDIRECTED
    closed = meek_closure(g)
    assert closed.mark(a, b) == DIRECTED
    assert np.array_equal(closed.marks, compelled_marks(g, extensions(g)))


@pytest.mark.parametrize("p", [3, 4, 5])
def test_knowledge_closure_matches_extension_oracle(p):
    for seed in range(60):
        dag = sample_er_dag(p, 2.0, [p, seed])
        for kind in KINDS:
            try:
                k = sample_knowledge(dag, kind, seed)
            except KnowledgeUnavailable:
                continue
            base = dag_to_cpdag(dag)
            closed = modified_cpdag(dag, k)
            exts = extensions(base, k)
            assert dag in exts
            assert np.array_equal(closed.marks, compelled_marks(base, exts))


def test_closure_never_adds_v_structures_or_cycles():
    for seed in range(100):
        dag = sample_er_dag(7, 3.0, seed)
        try:
            k = sample_knowledge(dag, KINDS[seed % 4], seed)
        except KnowledgeUnavailable:
            continue
        base = dag_to_cpdag(dag)
        closed = modified_cpdag(dag, k)
        assert closed.skeleton() == base.skeleton()
        for a, b in base.directed_edges():
            assert closed.mark(a, b) == DIRECTED
        parents = [0] * 7
        for a, b in closed.directed_edges():
            parents[b] |= 1 << a
        assert is_acyclic(parents)
        colliders = {(a, b, c) for a, b, c in v_structures(Dag(tuple(parents)))
                     if not closed.adjacent(a, c)}
        assert colliders == v_structures(dag)


def test_contradicting_knowledge_raises():
    chain = dag_to_cpdag(Dag.from_edges(3, [(0, 1), (1, 2)]))
    with pytest.raises(KnowledgeError, match="not in the graph"):
        meek_closure(chain, Knowledge.build(3, known=[(0, 2)]))
    with pytest.raises(KnowledgeError, match="adjacent"):
        meek_closure(chain, Knowledge.build(3, forbidden=[(0, 1)]))
    collider = dag_to_cpdag(Dag.from_edges(3, [(0, 1), (2, 1)]))
    with pytest.raises(KnowledgeError, match="later tier"):
        meek_closure(collider, Knowledge.build(3, tiers=[[1], [0, 2]]))


def test_shd_examples():
    empty = pdag(4)
    three = pdag(4, directed=[(0, 1)], undirected=[(1, 2), (2, 3)])
    assert shd(empty, three) == 3
    assert shd_scaled(empty, three) == 0.5
    reversed_edge = pdag(4, directed=[(1, 0)], undirected=[(1, 2), (2, 3)])
    assert shd(three, reversed_edge) == 1
    undirected = pdag(4, undirected=[(0, 1), (1, 2), (2, 3)])
    assert shd(three, undirected) == 1
    with pytest.raises(ValueError):
        shd(empty, pdag(3))


@st.composite
def cpdags(draw, p=5):
    seed = draw(st.integers(0, 10**6))
    return dag_to_cpdag(sample_er_dag(p, draw(st.floats(0, 4)), seed))


@given(cpdags(), cpdags(), cpdags())
@settings(max_examples=100, deadline=None)
def test_shd_is_a_metric(a, b, c):
    assert shd(a, a) == 0
    assert shd(a, b) == shd(b, a)
    assert (shd(a, b) == 0) == (a == b)
    assert shd(a, c) <= shd(a, b) + shd(b, c)
    assert 0.0 <= shd_scaled(a, b) <= 1.0
