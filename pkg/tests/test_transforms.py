import numpy as np
import pytest
from scipy import integrate

from kernels import (
    ExponentialKernel,
    ExponentialWeight,
    PerturbedKernel,
    TabulatedWeight,
)
from models.grid import GridFunction, TimeGrid
from models.kernel import PerturbationFamily
from service.transforms import laplace_transform, quad_tail, tail_integral
from utils.errors import DivergenceError, DomainError


def test_power_law_by_quadrature(power_kernel):
    expected, _ = integrate.quad(lambda s: np.exp(-0.5 * s) * (s + 1) ** -4, 0, np.inf)
    assert laplace_transform(power_kernel, 0.5) == pytest.approx(expected, rel=1e-6)


def test_power_law_diverges_for_negative_mu(power_kernel):
    with pytest.raises(DivergenceError):
        laplace_transform(power_kernel, -0.1)


def test_cutoff_transforms(power_kernel):
    cut_exp = PerturbedKernel(ExponentialKernel(1.0, 1.0), PerturbationFamily.cutoff, 2.0)
    assert laplace_transform(cut_exp, 0.0) == pytest.approx(1 - np.exp(-2.0))
    cut_power = PerturbedKernel(power_kernel, PerturbationFamily.cutoff, 2.0)
    assert laplace_transform(cut_power, 0.0) == pytest.approx((1 - 3.0**-3) / 3)


def test_oscillation_transform():
    kernel = PerturbedKernel(ExponentialKernel(1.0, 1.0), PerturbationFamily.oscillation, 2.0)
    assert laplace_transform(kernel, 0.0) == pytest.approx(0.2)


def test_weight_transforms(power_weight):
    assert laplace_transform(power_weight, 0.0) == pytest.approx(0.2)
    assert laplace_transform(ExponentialWeight(0.9, -0.8), -0.8) == pytest.approx(10.0)


def test_tabulated_weight_transform():
    grid = TimeGrid(dt=0.01, n_steps=20000)
    weight = TabulatedWeight(GridFunction.from_callable(grid, lambda t: np.exp(-t)))
    assert laplace_transform(weight, 0.0) == pytest.approx(1.0, rel=1e-4)


def test_constant_weight_diverges():
    grid = TimeGrid(dt=0.1, n_steps=1000)
    weight = TabulatedWeight(GridFunction.constant(grid, 1.0))
    with pytest.raises(DivergenceError):
        laplace_transform(weight, 0.0)


def test_tail_integral_models():
    times = np.linspace(0.0, 50.0, 5001)
    assert tail_integral(times, np.exp(-times)) == pytest.approx(np.exp(-50.0), rel=1e-6)
    times = np.linspace(1.0, 100.0, 9901)
    assert tail_integral(times, times**-3.0) == pytest.approx(5e-5, rel=1e-6)
    with pytest.raises(DivergenceError):
        tail_integral(times, times**-0.5)


def test_quad_tail():
    assert quad_tail(lambda s: np.exp(-s), 10.0, scale=0.0) == pytest.approx(np.exp(-10.0))
    with pytest.raises(DivergenceError):
        quad_tail(lambda s: 1.0 / s, 10.0, scale=1.0)
    with pytest.raises(DomainError):
        quad_tail(lambda s: np.exp(-s), 0.0, scale=1.0)
