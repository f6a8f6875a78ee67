from abc import ABC, abstractmethod
from typing import Optional, Tuple, Union

import numpy as np
from scipy import integrate

from kernels.base import BaseKernel
from kernels.combination import KernelSum
from kernels.exponential import ExponentialKernel
from models.analysis import ComparisonReport, ConditionCheck, ConditionTag
from models.grid import GridFunction, TimeGrid
from models.volterra import IntegroODEProblem
from service.transforms import laplace_transform, tail_integral
from utils.errors import DivergenceError, DomainError
from utils.logger import logger

NEUMANN_MAX_TERMS = 200
NEUMANN_TOLERANCE = 1e-12


def trapezoid_convolution(f: np.ndarray, g: np.ndarray, dt: float) -> np.ndarray:
    full = np.convolve(f, g)[: len(f)]
    out = dt * (full - 0.5 * (f * g[0] + f[0] * g))
    out[0] = 0.0
    return out


def convolve(f: GridFunction, g: GridFunction) -> GridFunction:
    """(f*g)(t) = int_0^t f(t-s) g(s) ds by the trapezoid rule on the shared grid."""
    f.grid.check_same(g.grid)
    return GridFunction(grid=f.grid, values=trapezoid_convolution(f.values, g.values, f.grid.dt))


def neumann_series(
    h: GridFunction, max_terms: int = NEUMANN_MAX_TERMS, tol: float = NEUMANN_TOLERANCE
) -> GridFunction:
    """sum_{n>=1} h^{*n}, truncated once the sup-norm of a term drops below tol."""
    term = h.values.copy()
    total = term.copy()
    for _ in range(1, max_terms):
        term = trapezoid_convolution(h.values, term, h.grid.dt)
        total += term
        if np.max(np.abs(term)) < tol:
            break
    return GridFunction(grid=h.grid, values=total)


def resolvent(h: GridFunction) -> GridFunction:
    """
    Solve r = h + h*r by forward stepping of the trapezoid system.

    r_i (1 - dt h_0 / 2) = h_i + dt (h_i r_0 / 2 + sum_{j=1}^{i-1} h_{i-j} r_j)
    """
    dt = h.grid.dt
    hv = h.values
    r = np.empty_like(hv)
    r[0] = hv[0]
    denom = 1.0 - 0.5 * dt * hv[0]
    if denom == 0:
        raise DivergenceError("Trapezoid resolvent system is singular at this dt", step=0)
    for i in range(1, len(hv)):
        history = 0.5 * hv[i] * r[0] + np.dot(hv[i - 1 : 0 : -1], r[1:i])
        r[i] = (hv[i] + dt * history) / denom
        if not np.isfinite(r[i]):
            raise DivergenceError(f"Resolvent overflowed at step {i}", step=i)

    warnings = []
    l1 = float(integrate.trapezoid(np.abs(hv), dx=dt))
    if l1 >= 1:
        warnings.append(f"||h||_1 = {l1:.4g} >= 1, Neumann cross-check skipped")
        logger.warning(warnings[-1])
    else:
        series = neumann_series(h)
        gap = float(np.max(np.abs(series.values - r)))
        if gap > 1e-8 * max(1.0, float(np.max(np.abs(r)))):
            warnings.append(f"Neumann series differs from the direct solve by {gap:.3g}")
            logger.warning(warnings[-1])
    return GridFunction(grid=h.grid, values=r, warnings=warnings)


def solve_volterra(h: GridFunction, f: GridFunction) -> GridFunction:
    """w = f + h*w, solved as w = f + r*f."""
    h.grid.check_same(f.grid)
    r = resolvent(h)
    return GridFunction(
        grid=f.grid,
        values=f.values + trapezoid_convolution(r.values, f.values, f.grid.dt),
        warnings=r.warnings,
    )


class MemoryQuadrature(ABC):
    """
    Trapezoid approximation of I_i = int_0^{t_i} K(t_i, s) x(s) ds.

    `at(i, x)` returns I_i given the committed states x_0..x_{i-1} and a
    candidate x_i; `commit(i, x)` fixes x_i.
    """

    def __init__(self, grid: TimeGrid, dim: int):
        self.dt = grid.dt
        self.dim = dim
        self.history = np.zeros((grid.size, dim))

    def commit(self, i: int, x: np.ndarray) -> None:
        self.history[i] = x

    @abstractmethod
    def at(self, i: int, x: np.ndarray) -> np.ndarray:
        pass


class NoMemory(MemoryQuadrature):
    def at(self, i, x):
        return np.zeros(self.dim)


class DirectMemory(MemoryQuadrature):
    """O(i) sum at step i from a lag table (translation invariant) or kernel rows."""

    def __init__(
        self,
        grid: TimeGrid,
        dim: int,
        lag_table: Optional[np.ndarray] = None,
        kernel: Optional[BaseKernel] = None,
    ):
        super().__init__(grid, dim)
        self.times = grid.times
        self.lag_table = lag_table
        self.kernel = kernel
        # largest lag index with a nonzero kernel value; older states drop out of the sum
        self.support = grid.n_steps
        if lag_table is not None:
            nonzero = np.flatnonzero(np.any(lag_table != 0, axis=(1, 2)))
            self.support = int(nonzero[-1]) if nonzero.size else 0
        self._cached: Tuple[int, np.ndarray, np.ndarray] | None = None

    def _row(self, i: int) -> Tuple[np.ndarray, np.ndarray]:
        """(K(t_i, s_j) for j < i, diagonal K(t_i, t_i)), ordered by s."""
        if self.lag_table is not None:
            return self.lag_table[i::-1][:i], self.lag_table[0]
        row = self.kernel.row(self.times[i], self.times[: i + 1])
        return row[:i], row[i]

    def _base(self, i: int) -> Tuple[np.ndarray, np.ndarray]:
        if self._cached is not None and self._cached[0] == i:
            return self._cached[1], self._cached[2]
        past, diag = self._row(i)
        lo = max(1, i - self.support)
        base = self.dt * np.einsum("jab,jb->a", past[lo:], self.history[lo:i])
        if i <= self.support:
            base += 0.5 * self.dt * (past[0] @ self.history[0])
        self._cached = (i, base, diag)
        return base, diag

    def at(self, i, x):
        if i == 0:
            return np.zeros(self.dim)
        base, diag = self._base(i)
        return base + 0.5 * self.dt * (diag @ x)


class ModalMemory(MemoryQuadrature):
    """
    Exact auxiliary recursion for sums of exponential modes:
    J_i = e^{-l dt} J_{i-1} + dt/2 (e^{-l dt} y_{i-1} + y_i), y = q . x
    """

    def __init__(self, grid: TimeGrid, dim: int, modes):
        super().__init__(grid, dim)
        self.directions = modes.directions
        self.amplitudes = modes.amplitudes
        self.decay = np.exp(-modes.rates * grid.dt)
        empty = (np.zeros(modes.rates.size, dtype=np.complex128), np.zeros(modes.rates.size))
        # (J, y) at the last committed index and at the one before it
        self.current = empty
        self.before = empty
        self.last = -1

    def _start(self, i: int):
        if i == self.last + 1:
            return self.current
        if i == self.last:
            return self.before
        raise DomainError(f"Modal memory is at step {self.last}, cannot evaluate step {i}")

    def _advance(self, i: int, x: np.ndarray) -> np.ndarray:
        state, previous = self._start(i)
        return self.decay * state + 0.5 * self.dt * (self.decay * previous + self.directions @ x)

    def at(self, i, x):
        if i == 0:
            return np.zeros(self.dim)
        return self.directions.T @ np.real(self.amplitudes * self._advance(i, x))

    def commit(self, i, x):
        super().commit(i, x)
        state = self._advance(i, x) if i > 0 else self.current[0]
        self.before = self._start(i)
        self.current = (state, self.directions @ x)
        self.last = i


def build_memory(
    kernel: Union[BaseKernel, GridFunction], grid: TimeGrid, fast: bool = False
) -> MemoryQuadrature:
    if isinstance(kernel, GridFunction):
        kernel.grid.check_same(grid)
        return DirectMemory(grid, 1, lag_table=kernel.values[:, None, None])
    if isinstance(kernel, KernelSum) and not kernel.terms:
        return NoMemory(grid, kernel.dim)
    if fast:
        modes = kernel.exponential_modes()
        if modes is not None:
            return ModalMemory(grid, kernel.dim, modes)
        logger.debug(f"{kernel!r} has no exponential modes, using the direct memory sum")
    if kernel.translation_invariant:
        return DirectMemory(grid, kernel.dim, lag_table=kernel.lags(grid.times))
    return DirectMemory(grid, kernel.dim, kernel=kernel)


def _integrate(
    a: float,
    memory: MemoryQuadrature,
    forcing: np.ndarray,
    y0: float,
    grid: TimeGrid,
    heun: bool,
) -> np.ndarray:
    dt = grid.dt
    x = np.empty(grid.size)
    x[0] = y0
    memory.commit(0, np.array([y0]))
    for i in range(grid.n_steps):
        slope = -a * x[i] + memory.at(i, x[i : i + 1])[0] + forcing[i]
        predicted = x[i] + dt * slope
        if heun:
            corrected = (
                -a * predicted + memory.at(i + 1, np.array([predicted]))[0] + forcing[i + 1]
            )
            x[i + 1] = x[i] + 0.5 * dt * (slope + corrected)
        else:
            x[i + 1] = predicted
        if not np.isfinite(x[i + 1]):
            raise DivergenceError(f"Integro-ODE solution is not finite at step {i + 1}", step=i + 1)
        memory.commit(i + 1, x[i + 1 : i + 2])
    return x


def solve_integro_ode(
    p: IntegroODEProblem, grid: TimeGrid, heun: bool = True, fast: bool = False
) -> GridFunction:
    """
    Explicit stepping of x' = -a x + int k(t-s) x(s) ds + g with a trapezoid memory sum.

    Euler is first order; the default Heun corrector makes it second order. `fast`
    switches to the exact modal recursion for exponential kernels.
    """
    forcing = np.zeros(grid.size) if p.g is None else p.g.values
    if p.g is not None:
        p.g.grid.check_same(grid)
    with np.errstate(over="ignore", invalid="ignore"):
        values = _integrate(p.a, build_memory(p.k, grid, fast), forcing, p.y0, grid, heun)
    return GridFunction(grid=grid, values=values, warnings=list(p.warnings))


def differential_resolvent(
    a: float, k: Union[GridFunction, BaseKernel], grid: Optional[TimeGrid] = None
) -> GridFunction:
    """z' = -a z + k*z, z(0) = 1; a kernel needs an explicit grid."""
    if grid is None:
        if not isinstance(k, GridFunction):
            raise DomainError("a grid is required for a kernel memory")
        grid = k.grid
    return solve_integro_ode(IntegroODEProblem(a=a, k=k, y0=1.0), grid)


def characteristic_gamma_star(a: float, k: ExponentialKernel) -> float:
    """Largest root of lambda + a = c / (beta + lambda) for k = c e^{-beta t}."""
    if not isinstance(k, ExponentialKernel):
        raise DomainError(f"Characteristic root needs an exponential kernel, got {k!r}")
    total = a + k.beta
    discriminant = total**2 - 4 * (a * k.beta - k.c)
    return 0.5 * (-total + np.sqrt(discriminant))


def kernel_samples(k: Union[BaseKernel, GridFunction], grid: TimeGrid) -> np.ndarray:
    if isinstance(k, GridFunction):
        return k.values
    return k.scalar_lags(grid.times)


def _kernel_transform(k: Union[BaseKernel, GridFunction], mu: float) -> float:
    if isinstance(k, BaseKernel):
        return laplace_transform(k, mu)
    values = np.exp(-mu * k.times) * k.values
    return float(integrate.trapezoid(values, k.times)) + tail_integral(k.times, values)


def comparison_bound_check(
    p: IntegroODEProblem,
    grid: TimeGrid,
    mu: float = 0.0,
    t_min: float = 1.0,
    t_max: Optional[float] = None,
    defect: Optional[GridFunction] = None,
) -> ComparisonReport:
    """
    Empirical side of the Volterra comparison bound.

    Checks mu + a > k^(mu), measures sup x / (y0 k + k*g) over [t_min, t_max],
    and verifies that the sub-solution driven by g - defect stays below x.
    """
    t_max = grid.horizon if t_max is None else t_max
    window = (t_min, t_max)
    try:
        k_hat = _kernel_transform(p.k, mu)
        condition = ConditionCheck(
            tag=ConditionTag.comparison, holds=mu + p.a > k_hat, lhs=mu + p.a, rhs=k_hat
        )
    except DivergenceError as e:
        k_hat = None
        condition = ConditionCheck(
            tag=ConditionTag.comparison, holds=False, checkable=False, warnings=[str(e)]
        )
    if not condition.holds:
        logger.warning(
            f"Comparison condition mu + a > k^(mu) does not hold "
            f"(lhs={condition.lhs}, rhs={condition.rhs}); decay is not guaranteed"
        )

    try:
        x = solve_integro_ode(p, grid)
    except DivergenceError as e:
        logger.error(f"Equality problem diverged: {e}")
        return ComparisonReport(
            condition=condition,
            window=window,
            dominance_holds=False,
            max_dominance_gap=float("inf"),
            status=f"divergent at step {e.step}",
        )

    k_values = kernel_samples(p.k, grid)
    g_values = np.zeros(grid.size) if p.g is None else p.g.values
    envelope = p.y0 * k_values + trapezoid_convolution(k_values, g_values, grid.dt)
    idx = grid.index_window(t_min, t_max)
    window_times = grid.times[idx]
    positive = envelope[idx] > 0
    empirical = argmax_time = None
    if np.any(positive):
        ratios = x.values[idx][positive] / envelope[idx][positive]
        best = int(np.argmax(ratios))
        empirical, argmax_time = float(ratios[best]), float(window_times[positive][best])
    else:
        logger.warning("Envelope y0 k + k*g vanishes on the window, no empirical constant")

    defect_values = np.zeros(grid.size) if defect is None else defect.values
    with np.errstate(over="ignore", invalid="ignore"):
        y = _integrate(p.a, build_memory(p.k, grid), g_values - defect_values, p.y0, grid, True)
    gap = float(np.max(y - x.values))

    observed = predicted = None
    if p.g is None and k_hat is not None and mu == 0 and p.a > k_hat and p.y0 * k_values[-1] > 0:
        observed = float(x.values[-1] / (p.y0 * k_values[-1]))
        predicted = 1.0 / (p.a - k_hat) ** 2

    return ComparisonReport(
        condition=condition,
        empirical_constant=empirical,
        argmax_time=argmax_time,
        window=window,
        dominance_holds=gap <= 1e-12 * max(1.0, x.sup_norm()),
        max_dominance_gap=gap,
        asymptotic_ratio_observed=observed,
        asymptotic_ratio_predicted=predicted,
        status="ok" if condition.holds else "not guaranteed",
    )
