import warnings
from typing import Union

import numpy as np
from scipy import integrate

from kernels.base import BaseKernel
from kernels.perturbed import PerturbedKernel
from kernels.weight import BaseWeight, TabulatedWeight
from models.kernel import PerturbationFamily
from utils.errors import DivergenceError, DomainError
from utils.logger import logger

TAIL_RELATIVE_TOLERANCE = 1e-8
MAX_TRUNCATION = 1e6
PANEL_RELATIVE_TOLERANCE = 1e-6
MAX_PANELS = 12


def _scalar_function(obj: Union[BaseKernel, BaseWeight]):
    if isinstance(obj, BaseKernel):
        if obj.dim != 1:
            raise DomainError(f"Laplace transform needs a scalar kernel, got dim={obj.dim}")
        return lambda s: obj.scalar_lags(np.atleast_1d(s))
    return lambda s: obj(np.atleast_1d(s))


def _spread(pair: np.ndarray) -> float:
    return abs(pair[1] - pair[0]) / max(abs(pair[1]), np.finfo(float).tiny)


def tail_integral(times: np.ndarray, values: np.ndarray) -> float:
    """
    Estimate of int_T^inf q(s) ds from the last samples of a nonnegative q.

    Three samples over the last fifth of the grid decide whether q looks like
    e^{-r s} (constant log-linear rate) or s^-p (constant log-log slope); the
    chosen model is extrapolated analytically. Raises DivergenceError when the
    extrapolated tail is not integrable (r <= 0 or p <= 1).
    """
    n = len(values) - 1
    q_end = values[n]
    if q_end == 0:
        return 0.0
    back = max(1, n // 10)
    idx = np.array([n - 2 * back, n - back, n])
    idx = idx[(idx >= 0) & (times[np.clip(idx, 0, n)] > 0)]
    if idx.size < 2:
        raise DivergenceError("Too few samples to extrapolate the tail")
    t, q = times[idx], values[idx]
    if np.any(q <= 0):
        raise DivergenceError("Cannot extrapolate the tail of a sign-changing integrand")
    log_q = np.log(q)
    rates = -np.diff(log_q) / np.diff(t)
    slopes = -np.diff(log_q) / np.diff(np.log(t))

    if idx.size == 3 and _spread(rates) < _spread(slopes):
        if rates[-1] <= 0:
            raise DivergenceError(
                f"Integrand grows like e^{-rates[-1]:.3g}s at the horizon, the integral diverges"
            )
        return float(q_end / rates[-1])
    if slopes[-1] <= 1:
        raise DivergenceError(
            f"Integrand decays like s^-{slopes[-1]:.3g} at the horizon, the integral diverges"
        )
    return float(q_end * t[-1] / (slopes[-1] - 1))


def quad_tail(func, start: float, scale: float, rel_tol: float = PANEL_RELATIVE_TOLERANCE) -> float:
    """
    int_start^inf func(s) ds over panels [L, 4L], L = start, 4 start, ...

    Stops once a panel adds less than rel_tol of (scale + running total); after
    MAX_PANELS the remainder is extrapolated as a geometric series of the panel
    ratio. Raises DivergenceError when panels stop shrinking.
    """
    if start <= 0:
        raise DomainError(f"Tail integrals start at a positive time, got {start}")
    total, previous, lower = 0.0, None, float(start)
    for _ in range(MAX_PANELS):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            panel, _ = integrate.quad(
                func, lower, 4 * lower, epsabs=0.0, epsrel=1e-10, limit=500
            )
        if not np.isfinite(panel):
            raise DivergenceError(f"Tail integrand is not finite beyond t={lower}")
        total += panel
        if abs(panel) <= rel_tol * max(abs(scale) + abs(total), np.finfo(float).tiny):
            return total
        if previous and panel / previous >= 0.999:
            raise DivergenceError(f"Tail panels beyond t={start} stop shrinking")
        previous, lower = panel, 4 * lower
    ratio = panel / previous
    return total + panel * ratio / (1 - ratio)


def _quad_with_tail(func, mu: float) -> float:
    def integrand(s):
        return float(np.exp(-mu * s) * func(s)[0])

    upper = 50.0
    while upper <= MAX_TRUNCATION:
        head, _ = integrate.quad(integrand, 0.0, upper, epsabs=0.0, epsrel=1e-10, limit=500)
        probe = np.array([upper / 4, upper / 2, upper])
        magnitudes = np.abs(np.exp(-mu * probe) * func(probe))
        try:
            tail = tail_integral(probe, magnitudes)
        except DivergenceError:
            upper *= 4
            continue
        if tail <= TAIL_RELATIVE_TOLERANCE * max(abs(head), np.finfo(float).tiny):
            return head
        upper *= 4
    raise DivergenceError(f"Laplace transform at mu={mu} did not converge")


def laplace_transform(k: Union[BaseKernel, BaseWeight], mu: float) -> float:
    """
    int_0^inf e^{-mu s} k(s) ds for a scalar kernel or a weight.

    Closed forms are used whenever the family has one; otherwise adaptive
    quadrature with a tail remainder below 1e-8 relative.
    """
    closed = k.laplace_closed_form(mu)
    if closed is not None:
        return float(closed)

    if isinstance(k, TabulatedWeight):
        times = k.samples.times
        values = np.exp(-mu * times) * k.samples.values
        head = float(integrate.trapezoid(values, times))
        return head + tail_integral(times, values)

    if isinstance(k, PerturbedKernel) and k.family == PerturbationFamily.cutoff:
        base = _scalar_function(k.base)
        value, _ = integrate.quad(
            lambda s: float(np.exp(-mu * s) * base(s)[0]), 0.0, k.alpha, epsrel=1e-10, limit=500
        )
        return float(value)

    if isinstance(k, PerturbedKernel) and k.family == PerturbationFamily.oscillation:
        base = _scalar_function(k.base)
        if mu < 0:
            raise DivergenceError(f"Transform of {k!r} diverges for mu={mu} < 0")
        if k.alpha == 0:
            return laplace_transform(k.base, mu)
        value, _ = integrate.quad(
            lambda s: float(np.exp(-mu * s) * base(s)[0]),
            0.0,
            np.inf,
            weight="cos",
            wvar=k.alpha,
            limlst=100,
        )
        return float(value)

    func = _scalar_function(k)
    value = _quad_with_tail(func, mu)
    logger.debug(f"Laplace transform of {k!r} at mu={mu} by quadrature: {value}")
    return value
