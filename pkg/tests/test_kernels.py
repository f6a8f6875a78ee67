import numpy as np
import pytest

from kernels import (
    ExponentialKernel,
    KernelSum,
    MatrixExponentialKernel,
    PerturbedKernel,
    PowerLawKernel,
    TwoTimeKernel,
    get_kernel,
    zero_kernel,
)
from models.kernel import (
    MatrixExponentialConfig,
    PerturbationFamily,
    PerturbedConfig,
    PowerLawConfig,
)
from service.transforms import laplace_transform
from utils.errors import DomainError


def test_power_law_evaluate(power_kernel):
    assert power_kernel.evaluate(1.0, 0.0)[0, 0] == pytest.approx(2.0**-4)
    assert power_kernel.evaluate(3.0, 3.0)[0, 0] == pytest.approx(1.0)


@pytest.mark.parametrize("t, s", [(0.5, 1.0), (-1.0, -2.0), (1.0, -0.1)])
def test_evaluate_rejects_bad_arguments(power_kernel, t, s):
    with pytest.raises(DomainError):
        power_kernel.evaluate(t, s)


def test_evaluate_is_pure(matrix_kernel):
    first = matrix_kernel.evaluate(2.0, 0.5)
    first[:] = 99.0
    again = matrix_kernel.evaluate(2.0, 0.5)
    assert np.array_equal(again, matrix_kernel.evaluate(2.0, 0.5))
    assert not np.any(again == 99.0)


def test_matrix_exponential_diagonal(matrix_kernel):
    value = matrix_kernel.evaluate(2.0, 0.0)
    assert np.allclose(value, np.diag(np.exp(-2.0 * np.array([0.5, 1.0, 2.0]))))


def test_matrix_exponential_random_basis_is_spd():
    kernel = get_kernel(MatrixExponentialConfig(eigvals=[0.5, 1.0, 2.0], basis_seed=3))
    mats = kernel.lags(np.linspace(0.0, 5.0, 11))
    assert np.allclose(mats, np.swapaxes(mats, 1, 2))
    assert np.all(np.linalg.eigvalsh(mats) > 0)


def test_matrix_exponential_rejects_bad_input():
    with pytest.raises(DomainError):
        MatrixExponentialKernel(np.eye(2), np.array([1.0, -1.0]))
    with pytest.raises(DomainError):
        MatrixExponentialKernel(np.ones((2, 2)), np.array([1.0, 2.0]))


def test_perturbation_families(power_kernel):
    translated = PerturbedKernel(power_kernel, PerturbationFamily.translation, 0.5)
    dilated = PerturbedKernel(power_kernel, PerturbationFamily.dilation, 1.0)
    cut = PerturbedKernel(power_kernel, PerturbationFamily.cutoff, 0.5)
    oscillating = PerturbedKernel(power_kernel, PerturbationFamily.oscillation, 2.0)

    assert translated.evaluate(1.0, 0.0)[0, 0] == pytest.approx(2.5**-4)
    assert dilated.evaluate(1.0, 0.0)[0, 0] == pytest.approx(2.0**-5)
    assert cut.evaluate(1.0, 0.0)[0, 0] == 0.0
    assert cut.evaluate(1.0, 0.6)[0, 0] == pytest.approx(1.4**-4)
    assert oscillating.evaluate(1.0, 0.0)[0, 0] == pytest.approx(2.0**-4 * np.cos(2.0))
    assert oscillating.negative_memory
    assert not translated.negative_memory


@pytest.mark.parametrize(
    "family",
    [PerturbationFamily.translation, PerturbationFamily.dilation, PerturbationFamily.oscillation],
)
def test_zero_strength_is_the_base_kernel(power_kernel, matrix_kernel, family):
    taus = np.linspace(0.0, 10.0, 101)
    for base in (power_kernel, matrix_kernel):
        assert np.array_equal(PerturbedKernel(base, family, 0.0).lags(taus), base.lags(taus))


def test_cutoff_beyond_horizon_is_the_base_kernel(exp_kernel):
    taus = np.linspace(0.0, 10.0, 101)
    cut = PerturbedKernel(exp_kernel, PerturbationFamily.cutoff, 10.0)
    assert np.array_equal(cut.lags(taus), exp_kernel.lags(taus))


def test_perturbation_validation(power_kernel):
    with pytest.raises(DomainError):
        PerturbedKernel(power_kernel, PerturbationFamily.translation, -0.1)
    two_time = TwoTimeKernel(lambda t, s: np.array([[np.exp(-t - s)]]), dim=1)
    with pytest.raises(DomainError):
        PerturbedKernel(two_time, PerturbationFamily.translation, 0.5)


def test_two_time_kernel_rows():
    kernel = TwoTimeKernel(lambda t, s: np.array([[np.exp(-(t - s)) / (1 + t)]]), dim=1)
    assert not kernel.translation_invariant
    assert kernel.evaluate(1.0, 0.5)[0, 0] == pytest.approx(np.exp(-0.5) / 2)
    with pytest.raises(DomainError):
        kernel.lags(np.array([0.0]))


def test_kernel_sum_arithmetic(power_kernel, exp_kernel):
    taus = np.linspace(0.0, 3.0, 7)
    diff = power_kernel - exp_kernel
    assert np.allclose(diff.lags(taus), power_kernel.lags(taus) - exp_kernel.lags(taus))
    assert np.allclose((2.0 * exp_kernel).lags(taus), 2 * exp_kernel.lags(taus))
    with pytest.raises(DomainError):
        KernelSum([(1.0, power_kernel), (1.0, MatrixExponentialKernel(np.eye(2), np.ones(2)))])


def test_exponential_modes_reproduce_lags(matrix_kernel):
    taus = np.linspace(0.0, 4.0, 9)
    assert np.allclose(matrix_kernel.exponential_modes().lags(taus), matrix_kernel.lags(taus))
    oscillating = PerturbedKernel(ExponentialKernel(2.0, 1.5), PerturbationFamily.oscillation, 0.7)
    assert np.allclose(oscillating.exponential_modes().lags(taus), oscillating.lags(taus))


def test_get_kernel_nested_config():
    config = PerturbedConfig(base=PowerLawConfig(), family="dilation", alpha=0.5)
    kernel = get_kernel(config)
    assert kernel.evaluate(1.0, 0.0)[0, 0] == pytest.approx(2.0**-4.5)


def test_laplace_examples():
    assert laplace_transform(ExponentialKernel(1.0, 2.0), 0.0) == pytest.approx(0.5)
    assert laplace_transform(PowerLawKernel(1.0, 0.1, 4.0), 0.0) == pytest.approx(1000 / 3)
    assert laplace_transform(zero_kernel(), 0.0) == 0.0
