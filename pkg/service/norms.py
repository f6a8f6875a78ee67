from typing import Union

import numpy as np
from scipy import integrate

from kernels.base import BaseKernel
from kernels.weight import BaseWeight
from models.analysis import SchurNorm, SubexponentialReport
from models.grid import GridFunction, TimeGrid
from service.transforms import laplace_transform, quad_tail
from service.volterra import trapezoid_convolution
from utils.errors import DivergenceError
from utils.linalg import operator_norm
from utils.logger import logger

SUBEXPONENTIAL_TOLERANCE = 0.05


def _weighted_square(kernel: BaseKernel, h: BaseWeight):
    def integrand(s: float) -> float:
        norm_sq = float(operator_norm(kernel.lags(np.array([s])))[0] ** 2)
        weight = float(h(np.array([s]))[0])
        if norm_sq == 0:
            return 0.0
        return norm_sq / weight if weight > 0 else np.inf

    return integrand


def _schur_translation_invariant(kernel: BaseKernel, h: BaseWeight, grid: TimeGrid) -> SchurNorm:
    times = grid.times
    integrand = operator_norm(kernel.lags(times)) ** 2 / h(times)
    head = float(integrate.trapezoid(integrand, times))
    warnings = []
    divergent = False
    try:
        tail = quad_tail(_weighted_square(kernel, h), grid.horizon, scale=head)
    except DivergenceError as e:
        tail = 0.0
        divergent = True
        warnings.append(f"Schur norm partial sums keep growing: {e}")
        logger.warning(f"{kernel!r} against {h!r}: {warnings[-1]}")
    # the integrand is nonnegative, so the sup over t is the t -> inf limit
    return SchurNorm(
        value=float(np.sqrt(head + max(tail, 0.0))),
        argmax_time=None if tail > 0 else grid.horizon,
        tail=tail,
        negative_memory=kernel.negative_memory,
        divergent=divergent,
        warnings=warnings,
    )


def _schur_two_time(
    kernel: BaseKernel, h: BaseWeight, grid: TimeGrid, t_stride: int
) -> SchurNorm:
    times = grid.times
    best, best_time = 0.0, 0.0
    # the horizon is always scanned
    for i in np.unique(np.r_[np.arange(1, grid.size, t_stride), grid.n_steps]):
        s = times[: i + 1]
        integrand = operator_norm(kernel.row(times[i], s)) ** 2 / h(times[i] - s)
        value = float(integrate.trapezoid(integrand, s))
        if value > best:
            best, best_time = value, float(times[i])
    return SchurNorm(
        value=float(np.sqrt(best)),
        argmax_time=best_time,
        negative_memory=kernel.negative_memory,
    )


def schur_norm(
    kernel: BaseKernel, h: BaseWeight, grid: TimeGrid, t_stride: int = 1
) -> SchurNorm:
    """
    sup_t ( int_0^t ||K(t, s)||^2 / h(t - s) ds )^{1/2}

    Translation-invariant kernels get the analytic t -> inf limit through a
    tail extrapolation; two-time kernels are scanned row by row, every
    `t_stride`-th grid time.
    """
    if kernel.translation_invariant:
        return _schur_translation_invariant(kernel, h, grid)
    return _schur_two_time(kernel, h, grid, t_stride)


def _self_convolution_ratio(h: BaseWeight, grid: TimeGrid) -> np.ndarray:
    values = h(grid.times)
    return trapezoid_convolution(values, values, grid.dt) / values


def mh_constant(h: BaseWeight, grid: TimeGrid) -> float:
    """M_h = sup (h*h)/h over the grid; 2 h(0) joins the candidates for subexponential h."""
    ratio = _self_convolution_ratio(h, grid)
    candidates = [float(np.max(ratio[np.isfinite(ratio)]))]
    if h.subexponential:
        try:
            candidates.append(2 * laplace_transform(h, 0.0))
        except DivergenceError as e:
            logger.warning(f"M_h limit for {h!r} unavailable: {e}")
    return max(candidates)


def weighted_sup_norm(
    f: Union[GridFunction, np.ndarray], h: BaseWeight, grid: TimeGrid
) -> float:
    if isinstance(f, GridFunction):
        f.grid.check_same(grid)
        f = f.values
    if not np.any(f):
        return 0.0
    return mh_constant(h, grid) * float(np.max(np.abs(f / h(grid.times))))


def subexponential_diagnostic(
    h: BaseWeight,
    grid: TimeGrid,
    window_s: float = 1.0,
    tol: float = SUBEXPONENTIAL_TOLERANCE,
) -> SubexponentialReport:
    """
    Empirical check of the three U(mu) limits at the ends of the grid:
    (h*h)/h -> 0 as t -> 0, (h*h)/h -> 2 h^(mu) at the horizon, and
    h(t - s)/h(t) -> e^{-mu s} uniformly for s <= window_s.
    """
    times = grid.times
    ratio = _self_convolution_ratio(h, grid)
    near_zero = float(ratio[1])
    at_horizon = float(ratio[-1])

    divergent = False
    try:
        target = 2 * laplace_transform(h, h.mu)
    except DivergenceError as e:
        logger.warning(f"{h!r} is not integrable against e^(-mu t): {e}")
        target = None
        divergent = True

    s = times[: grid.index_window(0.0, window_s).stop]
    shifted = h(grid.horizon - s) / h(grid.horizon)
    shift_error = float(np.max(np.abs(shifted - np.exp(-h.mu * s)) / np.exp(-h.mu * s)))

    convolution_ok = (
        target is not None and abs(at_horizon - target) <= tol * max(abs(target), 1e-300)
    )
    report = SubexponentialReport(
        ratio_near_zero=near_zero,
        ratio_at_horizon=at_horizon,
        limit_target=target,
        shift_error=shift_error,
        small_time_ok=near_zero <= tol * max(float(np.max(ratio)), 1e-300),
        convolution_ratio_ok=convolution_ok,
        shift_ok=shift_error <= tol,
        divergent=divergent,
        tolerance=tol,
    )
    if not report.passed:
        logger.warning(f"{h!r} fails the subexponential diagnostic: {report}")
    return report
