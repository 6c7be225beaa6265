import numpy as np
import pytest

from dkastar import synthgen
from dkastar.dataset import Dataset

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def random_instance(p, seed, n=500, degree=2.0):
    """(true DAG, dataset) from the synthetic protocol."""
    dag = synthgen.sample_er_dag(p, degree, [seed, 0])
    sem = synthgen.sample_sem(dag, [seed, 1])
    return dag, Dataset.from_array(synthgen.simulate(sem, n, [seed, 2]))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
