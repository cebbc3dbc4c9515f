import numpy as np
import pytest

import wonham_lab as wl


@pytest.fixture
def q3():
    """3-state benchmark rate matrix."""
    return wl.validate_rate_matrix([[-3.0, 1.0, 2.0], [1.0, -3.0, 2.0], [1.5, 1.5, -3.0]])


@pytest.fixture
def q2():
    """Symmetric 2-state matrix with unit jump rate."""
    return wl.validate_rate_matrix([[-1.0, 1.0], [1.0, -1.0]])


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_rate_matrix(rng, n, lo=0.05, hi=3.0):
    q = rng.uniform(lo, hi, size=(n, n))
    np.fill_diagonal(q, 0.0)
    np.fill_diagonal(q, -q.sum(axis=1))
    return wl.validate_rate_matrix(q)


def random_interior(rng, n, floor=0.05):
    p = rng.dirichlet(np.ones(n)) * (1 - floor) + floor / n
    return wl.SimplexVector(p / p.sum())
