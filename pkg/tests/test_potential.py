import numpy as np
import pytest

from models.kernel import PotentialConfig
from service.potential import Potential, check_potential
from utils.errors import DomainError


def test_log_cosh_potential_passes():
    pot = Potential(10.0 * np.eye(3), lipschitz_g=0.01, u=10.0, convex_part="log_cosh")
    report = check_potential(pot)
    assert report.passed
    assert report.max_lipschitz_ratio <= 0.01 * (1 + 1e-12)
    assert report.min_monotonicity >= 0


def test_wrong_kappa_is_reported():
    pot = Potential(np.diag([1.0, 2.0]), kappa0=1.5)
    report = check_potential(pot)
    assert not report.passed
    assert report.kappa_error == pytest.approx(0.5)


def test_minimum_and_gradient():
    pot = Potential(np.diag([1.0, 2.0]), lipschitz_g=0.5, convex_part="log_cosh")
    assert np.array_equal(pot.gradient(pot.minimum), np.zeros(2))
    assert pot.value(pot.minimum) == pytest.approx(0.0)
    x = np.array([1.0, -2.0])
    assert np.allclose(pot.gradient(x), np.diag([1.0, 2.0]) @ x + 0.5 * np.tanh(x))
    stack = np.array([[1.0, -2.0], [0.5, 0.5]])
    assert pot.gradient(stack).shape == (2, 2)


def test_zero_convex_part_ignores_lipschitz():
    pot = Potential(np.eye(2), lipschitz_g=5.0, convex_part="zero")
    assert pot.lipschitz_g == 0.0
    assert np.array_equal(pot.grad_g(np.ones(2)), np.zeros(2))


@pytest.mark.parametrize(
    "R",
    [np.array([[1.0, 0.5], [0.0, 1.0]]), np.diag([1.0, -1.0]), np.diag([0.0, 1.0])],
)
def test_invalid_quadratic_part(R):
    with pytest.raises(DomainError):
        Potential(R)


def test_from_config():
    pot = Potential.from_config(PotentialConfig(), dim=3)
    assert np.array_equal(pot.R, 10.0 * np.eye(3))
    assert pot.kappa0 == pytest.approx(10.0)
    assert pot.lipschitz_g == 0.01
    assert pot.u == 10.0
