import numpy as np
import pytest

from gdquant.core import validate_system
from gdquant.fixtures import example1_system, example2_system, homogeneous_system

# filled by tests/test_acceptance.py, printed at the end of the session
ACCEPTANCE_LINES = {}


def random_support(rng, n, density=0.5, irreducible=False):
    """Random adjacency with fan-out >= 2 on every row."""
    while True:
        adj = rng.random((n, n)) < density
        if irreducible:
            for i in range(n):
                adj[i, (i + 1) % n] = True
        for i in range(n):
            while adj[i].sum() < 2:
                adj[i, rng.integers(n)] = True
        return adj


def random_system(rng, n=None, r=None, irreducible=False, density=0.5, ratio_range=(0.05, 0.6),
                  separable=False):
    """Seeded random Markov system.

    ``separable`` scales each row of ratios so that it sums below 0.9, which
    makes an interval realization possible.
    """
    n = int(rng.integers(2, 7)) if n is None else n
    r = float(rng.choice([0.5, 1.0, 2.0])) if r is None else r
    adj = random_support(rng, n, density, irreducible)
    P = np.where(adj, rng.uniform(0.1, 1.0, (n, n)), 0.0)
    P /= P.sum(axis=1, keepdims=True)
    C = np.where(adj, rng.uniform(*ratio_range, (n, n)), 0.0)
    if separable:
        rows = C.sum(axis=1, keepdims=True)
        C = np.where(rows > 0.9, C * 0.9 / rows, C)
    chi = rng.uniform(0.5, 1.0, n)
    return validate_system(P, C, chi / chi.sum(), r)


@pytest.fixture
def homog():
    return homogeneous_system()


@pytest.fixture(scope="session")
def ex1():
    return example1_system(0)


@pytest.fixture(scope="session")
def ex2():
    return example2_system()


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
