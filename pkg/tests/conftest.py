import numpy as np
import pytest

from kernels import (
    ExponentialKernel,
    ExponentialWeight,
    MatrixExponentialKernel,
    PowerLawKernel,
    PowerLawWeight,
)
from models.grid import TimeGrid


@pytest.fixture
def short_grid() -> TimeGrid:
    return TimeGrid(dt=0.01, n_steps=1000)


@pytest.fixture
def long_grid() -> TimeGrid:
    return TimeGrid(dt=0.01, n_steps=20000)


@pytest.fixture
def power_kernel() -> PowerLawKernel:
    return PowerLawKernel(c=1.0, alpha=1.0, beta=4.0)


@pytest.fixture
def exp_kernel() -> ExponentialKernel:
    return ExponentialKernel(c=1.0, beta=2.0)


@pytest.fixture
def matrix_kernel() -> MatrixExponentialKernel:
    return MatrixExponentialKernel(eigvecs=np.eye(3), eigvals=np.array([0.5, 1.0, 2.0]))


@pytest.fixture
def power_weight() -> PowerLawWeight:
    return PowerLawWeight(alpha=1.0, beta=6.0)


@pytest.fixture
def exp_weight() -> ExponentialWeight:
    return ExponentialWeight(rate=0.9, mu=-0.8)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(0)
