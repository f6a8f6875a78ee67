from typing import Optional, Sequence, Tuple, Union

import numpy as np
from scipy import stats

from kernels.exponential import ExponentialKernel
from kernels.weight import BaseWeight
from models.analysis import (
    BoundConstant,
    DecayFit,
    DecayModel,
    LinearityReport,
    MomentFunctional,
    MomentSeries,
    WassersteinBound,
)
from models.grid import GridFunction
from models.simulation import CoupledEnsemble, Ensemble, LyapunovParams, Order
from service.lyapunov import lyapunov_distance_sq
from service.volterra import characteristic_gamma_star
from utils.errors import DomainError, FitError
from utils.logger import logger

MIN_FIT_POINTS = 5
MIN_LINEARITY_POINTS = 4
UNDERFLOW = 1e-300
POWER_LAW_WINDOW = (5.0, 100.0)


def _default_window(series: GridFunction, model: DecayModel) -> Tuple[float, float]:
    horizon = series.grid.horizon
    if model == DecayModel.exponential:
        return (horizon / 2, horizon)
    return (POWER_LAW_WINDOW[0], min(POWER_LAW_WINDOW[1], horizon))


def fit_decay(
    series: GridFunction,
    model: Union[DecayModel, str] = DecayModel.power_law,
    window: Optional[Tuple[float, float]] = None,
    shift: float = 0.0,
) -> DecayFit:
    """
    Least squares on (log(t + shift), log x) for power laws or (t, log x) for
    exponentials. The rate is minus the slope, positive for a decaying series.
    """
    model = DecayModel(model)
    window = window or _default_window(series, model)
    if window[1] > series.grid.horizon + series.grid.dt / 2:
        raise FitError(f"Window {window} exceeds the horizon {series.grid.horizon}")
    times, values = series.window(*window)
    abscissa = np.log(times + shift) if model == DecayModel.power_law else times

    usable = (values > UNDERFLOW) & np.isfinite(abscissa)
    dropped = int(np.size(values) - np.count_nonzero(usable))
    if dropped:
        logger.warning(f"Dropped {dropped} non-positive points from the {model.value} fit")
    if np.count_nonzero(usable) < MIN_FIT_POINTS:
        raise FitError(
            f"{model.value} fit on {window} needs {MIN_FIT_POINTS} positive points, "
            f"got {np.count_nonzero(usable)}"
        )
    result = stats.linregress(abscissa[usable], np.log(values[usable]))
    r_squared = 0.0 if not np.isfinite(result.rvalue) else float(result.rvalue**2)
    return DecayFit(
        model=model,
        rate=-float(result.slope),
        intercept=float(result.intercept),
        window=window,
        r_squared=min(r_squared, 1.0),
        shift=shift,
        dropped_points=dropped,
    )


def empirical_sup_ratio(
    series: GridFunction,
    h: BaseWeight,
    offset: float = 0.0,
    window: Optional[Tuple[float, float]] = None,
) -> BoundConstant:
    """max over the window of series / (h + offset); t = 0 is excluded by default."""
    grid = series.grid
    window = window or (grid.dt, grid.horizon)
    times, values = series.window(*window)
    denominator = h(times) + offset
    if np.any(denominator <= 0):
        raise DomainError("h + offset must be positive on the window")
    ratios = values / denominator
    best = int(np.argmax(ratios))
    return BoundConstant(
        value=max(float(ratios[best]), 0.0),
        offset=offset,
        window=window,
        argmax_time=float(times[best]),
        weight=repr(h),
    )


def threshold_f(c: float, alpha: float, beta: float) -> float:
    """c alpha^{1-beta} / (beta - 1), the integral of c (t + alpha)^-beta."""
    if beta <= 1:
        raise DomainError(f"threshold_f needs beta > 1, got {beta}")
    return c * alpha ** (1 - beta) / (beta - 1)


def rate_p(a: float, beta: float, c: float) -> float:
    return characteristic_gamma_star(a, ExponentialKernel(c, beta))


def linearity_report(xs: Sequence[float], ys: Sequence[float]) -> LinearityReport:
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if xs.size != ys.size or xs.size < MIN_LINEARITY_POINTS:
        raise FitError(f"Linearity needs {MIN_LINEARITY_POINTS} paired points, got {xs.size}")
    if np.ptp(xs) == 0:
        raise FitError("Squared kernel errors have zero variance")
    if np.ptp(ys) == 0:
        return LinearityReport(slope=0.0, intercept=float(ys[0]), pearson_r=0.0, n_points=xs.size)
    result = stats.linregress(xs, ys)
    return LinearityReport(
        slope=float(result.slope),
        intercept=float(result.intercept),
        pearson_r=float(result.rvalue),
        n_points=int(xs.size),
    )


def _split(states: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    d = states.shape[-1] // 2
    return states[..., :d], states[..., d:]


def _pointwise(
    ens: Union[CoupledEnsemble, Ensemble],
    functional: MomentFunctional,
    params: Optional[LyapunovParams],
) -> np.ndarray:
    if isinstance(ens, CoupledEnsemble):
        states = ens.differences() if functional != MomentFunctional.norm_sq else np.stack(
            [p.states for p in ens.true_paths]
        )
    else:
        states = ens.stacked()
    if functional != MomentFunctional.lyapunov_sq:
        return np.sum(states**2, axis=-1)
    if ens.order != Order.second:
        raise DomainError("LyapunovSq is defined for second-order ensembles only")
    if params is None:
        raise DomainError("LyapunovSq needs LyapunovParams")
    z, w = _split(states)
    return lyapunov_distance_sq(params, z, w)


def ensemble_moments(
    ens: Union[CoupledEnsemble, Ensemble],
    functional: Union[MomentFunctional, str] = MomentFunctional.diff_sq,
    params: Optional[LyapunovParams] = None,
) -> MomentSeries:
    """
    Batch mean and standard error of a squared functional at every grid time.

    DiffSq and LyapunovSq act on the difference process of a coupled ensemble,
    or on the distance to the equilibrium (x*, 0) = 0 of a single ensemble.
    NormSq is |state|^2 of a single ensemble or of the true system.
    """
    functional = MomentFunctional(functional)
    values = _pointwise(ens, functional, params)
    batches = values.shape[0]
    stderr = (
        np.std(values, axis=0, ddof=1) / np.sqrt(batches)
        if batches > 1
        else np.zeros(values.shape[1])
    )
    return MomentSeries(
        functional=functional,
        mean=GridFunction(grid=ens.grid, values=np.mean(values, axis=0)),
        stderr=GridFunction(grid=ens.grid, values=stderr),
        batches=batches,
    )


def wasserstein_upper_bound(ens: CoupledEnsemble) -> WassersteinBound:
    """E|(true - perturbed) state|^2 bounds W_2^2 of the two laws at every time."""
    mean = ensemble_moments(ens, MomentFunctional.diff_sq).mean
    best = int(np.argmax(mean.values))
    return WassersteinBound(
        at_horizon=float(mean.values[-1]),
        supremum=float(mean.values[best]),
        argmax_time=float(mean.times[best]),
    )
