from typing import Optional, Union

import numpy as np

from kernels.weight import BaseWeight
from models.analysis import ConditionCheck, ConditionTag, SchurNorm
from service.transforms import laplace_transform
from utils.errors import DivergenceError, DomainError
from utils.logger import logger

FRICTION_BOUND = 0.75


def _friction(gamma: float, lipschitz_g: Optional[float], u: Optional[float]) -> ConditionCheck:
    if lipschitz_g is None or u is None:
        raise DomainError("SecondOrderFriction needs lipschitz_g and u")
    lhs = lipschitz_g * u / gamma**2
    return ConditionCheck(
        tag=ConditionTag.second_order_friction,
        holds=lhs <= FRICTION_BOUND,
        lhs=lhs,
        rhs=FRICTION_BOUND,
    )


def check_condition(
    tag: ConditionTag,
    gamma: float,
    mu: float = 0.0,
    h: Optional[BaseWeight] = None,
    kernel_norm: Union[float, SchurNorm, None] = None,
    lam: Optional[float] = None,
    lipschitz_g: Optional[float] = None,
    u: Optional[float] = None,
) -> ConditionCheck:
    """
    Evaluate one of the sufficient decay conditions literally and return both sides.

    kernel_norm is the Schur norm of K for the moment tags and of the perturbed
    kernel K~ for the error tags. A divergent h^(mu) or Schur norm makes the
    check not checkable.
    """
    tag = ConditionTag(tag)
    if gamma <= 0:
        raise DomainError(f"gamma must be positive, got {gamma}")
    if tag == ConditionTag.second_order_friction:
        check = _friction(gamma, lipschitz_g, u)
        if not check.holds:
            logger.warning(f"{tag.value} fails: {check.lhs:.4g} > {check.rhs}")
        return check
    if tag == ConditionTag.comparison:
        raise DomainError("Comparison conditions are evaluated by comparison_bound_check")
    if h is None or kernel_norm is None:
        raise DomainError(f"{tag.value} needs a weight and a kernel norm")
    if tag in (ConditionTag.second_order_moment, ConditionTag.second_order_error) and lam is None:
        raise DomainError(f"{tag.value} needs the Lyapunov parameter lambda")

    warnings = []
    if isinstance(kernel_norm, SchurNorm):
        if kernel_norm.divergent:
            warnings.extend(kernel_norm.warnings)
            return ConditionCheck(tag=tag, holds=False, checkable=False, warnings=warnings)
        if kernel_norm.negative_memory:
            warnings.append("kernel takes negative values")
        kernel_norm = kernel_norm.value

    try:
        h_hat = laplace_transform(h, mu)
    except DivergenceError as e:
        logger.warning(f"{tag.value} is not checkable: {e}")
        return ConditionCheck(tag=tag, holds=False, checkable=False, warnings=[str(e)])

    if tag == ConditionTag.first_order_moment:
        lhs, rhs = mu + 2 * gamma, 2 * kernel_norm * np.sqrt(h_hat)
    elif tag == ConditionTag.first_order_error:
        lhs, rhs = mu + 2 * gamma, 2 * kernel_norm * np.sqrt(2 * h_hat)
    elif tag == ConditionTag.second_order_moment:
        lhs, rhs = mu + 2 * gamma * lam, 2 * np.sqrt(2 * kernel_norm**2 * h_hat)
    else:
        lhs, rhs = mu + 2 * gamma * lam, 4 * np.sqrt(kernel_norm**2 * h_hat)

    check = ConditionCheck(
        tag=tag, holds=bool(lhs > rhs), lhs=float(lhs), rhs=float(rhs), warnings=warnings
    )
    if not check.holds:
        logger.warning(
            f"{tag.value} does not hold: {check.lhs:.4g} <= {check.rhs:.4g}; "
            "decay is not guaranteed, simulation proceeds"
        )
    return check
