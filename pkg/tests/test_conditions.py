import numpy as np
import pytest

from models.analysis import ConditionTag, SchurNorm
from service.conditions import check_condition
from utils.errors import DomainError


def test_first_order_error_holds(power_weight):
    check = check_condition(
        ConditionTag.first_order_error, gamma=3.0, h=power_weight, kernel_norm=1.0
    )
    assert check.holds
    assert check.lhs == pytest.approx(6.0)
    assert check.rhs == pytest.approx(2 * np.sqrt(0.4))


def test_second_order_error_fails(exp_weight):
    check = check_condition(
        ConditionTag.second_order_error,
        gamma=10.0,
        mu=-0.8,
        h=exp_weight,
        kernel_norm=SchurNorm(value=np.sqrt(10.0)),
        lam=0.125,
    )
    assert not check.holds
    assert check.checkable
    assert check.lhs == pytest.approx(1.7)
    assert check.rhs == pytest.approx(40.0)


@pytest.mark.parametrize(
    "tag",
    [
        ConditionTag.first_order_moment,
        ConditionTag.first_order_error,
        ConditionTag.second_order_moment,
        ConditionTag.second_order_error,
    ],
)
def test_zero_kernel_always_holds(power_weight, tag):
    check = check_condition(tag, gamma=1.0, h=power_weight, kernel_norm=0.0, lam=0.125)
    assert check.rhs == 0.0
    assert check.holds


def test_divergent_norm_is_not_checkable(power_weight):
    norm = SchurNorm(value=0.0, divergent=True, warnings=["partial sums keep growing"])
    check = check_condition(
        ConditionTag.first_order_moment, gamma=3.0, h=power_weight, kernel_norm=norm
    )
    assert not check.checkable
    assert not check.holds
    assert check.warnings == ["partial sums keep growing"]


def test_divergent_transform_is_not_checkable(power_weight):
    check = check_condition(
        ConditionTag.first_order_moment, gamma=3.0, mu=-0.5, h=power_weight, kernel_norm=1.0
    )
    assert not check.checkable


def test_negative_memory_is_flagged(power_weight):
    norm = SchurNorm(value=0.1, negative_memory=True)
    check = check_condition(
        ConditionTag.first_order_error, gamma=3.0, h=power_weight, kernel_norm=norm
    )
    assert check.holds
    assert check.warnings == ["kernel takes negative values"]


def test_friction_condition():
    check = check_condition(
        ConditionTag.second_order_friction, gamma=10.0, lipschitz_g=0.01, u=10.0
    )
    assert check.holds
    assert check.lhs == pytest.approx(0.001)
    failing = check_condition(ConditionTag.second_order_friction, gamma=1.0, lipschitz_g=1, u=1)
    assert not failing.holds


def test_missing_arguments(power_weight):
    with pytest.raises(DomainError):
        check_condition(ConditionTag.second_order_moment, 1.0, h=power_weight, kernel_norm=1.0)
    with pytest.raises(DomainError):
        check_condition(ConditionTag.first_order_moment, 1.0)
    with pytest.raises(DomainError):
        check_condition(ConditionTag.comparison, 1.0, h=power_weight, kernel_norm=1.0)
    with pytest.raises(DomainError):
        check_condition(ConditionTag.first_order_moment, 0.0, h=power_weight, kernel_norm=1.0)
