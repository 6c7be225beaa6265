import math

import numpy as np
import pytest

from dkastar.graph import Dag, is_acyclic
from dkastar.knowledge import consistent_with
from dkastar.synthgen import (
    KINDS,
    KnowledgeUnavailable,
    sample_er_dag,
    sample_knowledge,
    sample_sem,
    simulate,
)


def test_zero_degree_gives_empty_graph():
    for seed in range(20):
        assert sample_er_dag(6, 0.0, seed).n_edges() == 0


def test_two_variables_degree_one_always_connected():
    for seed in range(50):
        assert sample_er_dag(2, 1.0, seed).n_edges() == 1


def test_degree_is_clamped_with_warning():
    with pytest.warns(UserWarning, match="clamped"):
        dag = sample_er_dag(3, 5.0, 0)
    assert dag.n_edges() == 3


def test_mean_edge_count():
    p, degree, runs = 10, 2.0, 1000
    counts = np.array([sample_er_dag(p, degree, s).n_edges() for s in range(runs)])
    q = degree / (p - 1)
    pairs = p * (p - 1) / 2
    sigma = math.sqrt(pairs * q * (1 - q) / runs)
    assert abs(counts.mean() - 10.0) <= 3 * sigma


def test_sampled_graphs_are_acyclic_and_reproducible():
    for seed in range(50):
        a = sample_er_dag(8, 3.0, seed)
        assert is_acyclic(a.parents)
        assert sample_er_dag(8, 3.0, seed) == a


def test_parameter_ranges():
    for seed in range(30):
        dag = sample_er_dag(7, 3.0, seed)
        sem = sample_sem(dag, seed)
        for a, b in dag.edges():
            assert 0.2 <= abs(sem.weights[a, b]) <= 0.8
        assert np.count_nonzero(sem.weights) == dag.n_edges()
        assert np.all((sem.noise_std >= 1.0) & (sem.noise_std <= 2.0))


def test_signs_are_balanced():
    signs = []
    for seed in range(200):
        dag = sample_er_dag(6, 3.0, seed)
        sem = sample_sem(dag, seed)
        signs += [np.sign(sem.weights[a, b]) for a, b in dag.edges()]
    assert abs(np.mean(signs)) < 0.1


def test_noise_and_weight_recovery():
    dag = Dag.from_edges(2, [(0, 1)])
    sem = sample_sem(dag, 4)
    x = simulate(sem, 10_000, 5)
    assert np.std(x[:, 0]) == pytest.approx(sem.noise_std[0], rel=0.1)
    slope, intercept = np.polyfit(x[:, 0], x[:, 1], 1)
    assert abs(slope - sem.weights[0, 1]) < 0.05
    resid = x[:, 1] - slope * x[:, 0] - intercept
    assert np.std(resid) == pytest.approx(sem.noise_std[1], rel=0.1)


@pytest.mark.parametrize("p", [2, 3, 4])
def test_empirical_covariance(p):
    dag = sample_er_dag(p, 1.0, p)
    sem = sample_sem(dag, p)
    emp = np.cov(simulate(sem, 50_000, p), rowvar=False)
    cov = sem.covariance()
    scale = np.sqrt(np.outer(np.diag(cov), np.diag(cov)))
    assert np.all(np.abs(emp - cov) <= 0.1 * scale)


def test_simulation_is_deterministic():
    sem = sample_sem(sample_er_dag(5, 2.0, 1), 2)
    assert simulate(sem, 100, 3).tobytes() == simulate(sem, 100, 3).tobytes()


def test_knowledge_unavailable_cases():
    complete = Dag.from_edges(3, [(0, 1), (0, 2), (1, 2)])
    with pytest.raises(KnowledgeUnavailable):
        sample_knowledge(complete, "forbidden", 0)
    with pytest.raises(KnowledgeUnavailable):
        sample_knowledge(Dag.empty(3), "known", 0)
    with pytest.raises(ValueError):
        sample_knowledge(complete, "bogus", 0)


def test_chain_tiers():
    chain = Dag.from_edges(3, [(0, 1), (1, 2)])
    k = sample_knowledge(chain, "tiers", 0)
    assert k.tiers == ((0,), (1,), (2,))


def test_sampled_knowledge_is_true_of_the_graph():
    for seed in range(200):
        dag = sample_er_dag(6, 2.0, seed)
        for kind in KINDS:
            try:
                k = sample_knowledge(dag, kind, seed)
            except KnowledgeUnavailable:
                continue
            assert consistent_with(dag, k)
            if kind == "tiers":
                src, snk = k.tiers[0][0], k.tiers[2][0]
                assert dag.parents[src] == 0 and src != snk
                assert not any(m >> snk & 1 for m in dag.parents)
