import numpy as np
import pytest

from igmanova.model import ProblemDims, complex_normal

# The dimension grid exercised by the dual-form and equivalence contracts.
DIMS_GRID = [
    ProblemDims(8, 19, 3, 2, 4),
    ProblemDims(8, 12, 3, 4, 2),
    ProblemDims(8, 24, 8, 8, 0),
    ProblemDims(8, 24, 8, 1, 0),
    ProblemDims(8, 13, 1, 2, 4),
    ProblemDims(6, 14, 2, 2, 0),
]


def random_hpd(rng, n, cond_floor=0.1):
    X = complex_normal(rng, (n, n))
    return X @ X.conj().T + cond_floor * n * np.eye(n)


def random_data(rng, dims, signal=2.0):
    """Correlated-noise data with interference and signal in the cells under test."""
    R = random_hpd(rng, dims.N)
    Z = np.linalg.cholesky(R) @ complex_normal(rng, (dims.N, dims.K))
    Z[:dims.J, :dims.M] += signal * complex_normal(rng, (dims.J, dims.M))
    return Z


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
