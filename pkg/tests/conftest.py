import numpy as np
import pytest

from ckspectral.markov import AdjacencyMatrix, perron_frobenius

# one line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE_LINES: dict[int, str] = {}


def random_primitive(seed: int, n: int, density: float = 0.6) -> AdjacencyMatrix:
    return AdjacencyMatrix.random(n, np.random.default_rng(seed), density)


@pytest.fixture(scope="session")
def full2():
    return perron_frobenius(AdjacencyMatrix.full_shift(2))


@pytest.fixture(scope="session")
def full3():
    return perron_frobenius(AdjacencyMatrix.full_shift(3))


@pytest.fixture(scope="session")
def golden():
    return perron_frobenius(AdjacencyMatrix.golden_mean())


@pytest.fixture(scope="session")
def free2():
    return perron_frobenius(AdjacencyMatrix.free_group(2))


@pytest.fixture(scope="session")
def rand3():
    return perron_frobenius(random_primitive(3, 3))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
