import asyncio
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from tqdm import tqdm

from kernels import PerturbedKernel, get_kernel, get_weight
from kernels.exponential import ExponentialKernel
from kernels.power_law import PowerLawKernel
from models.analysis import ConditionTag, DecayModel, MomentFunctional
from models.kernel import PerturbationFamily, PotentialConfig
from models.experiment import (
    ExperimentKind,
    ExperimentReport,
    ExpGridSpec,
    FirstOrderPerturbSpec,
    PerturbationSpec,
    PowerLawGridSpec,
    SecondOrderPerturbSpec,
    SimulateSpec,
)
from models.simulation import Ensemble, Order, SimConfig
from models.volterra import IntegroODEProblem
from service.analysis import (
    empirical_sup_ratio,
    ensemble_moments,
    fit_decay,
    linearity_report,
    rate_p,
    threshold_f,
    wasserstein_upper_bound,
)
from service.conditions import check_condition
from service.gle import couple, simulate_ensemble
from service.lyapunov import lyapunov_params
from service.norms import schur_norm
from service.potential import Potential
from service.volterra import solve_integro_ode
from utils.errors import DivergenceError, FitError
from utils.file import dump_path
from utils.logger import logger
from utils.report import write_trajectory

NO_DECAY_TOLERANCE = 1e-9


async def _gather_cells(cells: List[Tuple], run_cell, threads: int, desc: str) -> List[Dict]:
    pbar = tqdm(total=len(cells), desc=desc)
    sem = asyncio.Semaphore(max(1, threads))

    async def run(cell: Tuple) -> Dict:
        async with sem:
            row = await asyncio.to_thread(run_cell, *cell)
            pbar.update()
            return row

    rows = await asyncio.gather(*[run(cell) for cell in cells])
    pbar.close()
    return rows


def _powerlaw_cell(spec: PowerLawGridSpec, a: float, beta: float) -> Dict[str, Any]:
    threshold = threshold_f(spec.c, spec.alpha, beta)
    below = a < threshold
    row = {
        "a": a,
        "beta": beta,
        "threshold_f": threshold,
        "condition_lhs": a,
        "condition_rhs": threshold,
        "condition_holds": a > threshold,
        "fitted_rate": None,
        "r_squared": None,
        "ratio": 0.0,
        "status": "below threshold" if below else "ok",
    }
    kernel = PowerLawKernel(spec.c, spec.alpha, beta)
    try:
        solution = solve_integro_ode(IntegroODEProblem(a=a, k=kernel), spec.grid)
        fit = fit_decay(solution, DecayModel.power_law, spec.fit_window)
    except DivergenceError as e:
        # growth is the expected outcome below the threshold
        prefix = "below threshold, " if below else ""
        row["status"] = f"{prefix}divergent at step {e.step}"
        if not below:
            logger.error(f"Power-law cell a={a}, beta={beta} diverged: {e}")
        return row
    except FitError as e:
        row["status"] = f"fit error: {e}"
        return row
    row.update(fitted_rate=fit.rate, r_squared=fit.r_squared)
    if not below:
        row["ratio"] = fit.rate / beta
    return row


async def run_powerlaw_grid(spec: PowerLawGridSpec, threads: int = 1) -> ExperimentReport:
    cells = [(spec, a, beta) for a in sorted(spec.a_values) for beta in sorted(spec.beta_values)]
    rows = await _gather_cells(cells, _powerlaw_cell, threads, "Power-law grid")
    return ExperimentReport(kind=ExperimentKind.powerlaw_grid, rows=rows)


def _exp_cell(spec: ExpGridSpec, a: float, beta: float) -> Dict[str, Any]:
    theory = abs(rate_p(a, beta, spec.c))
    row = {
        "a": a,
        "beta": beta,
        "theory_rate": theory,
        "condition_lhs": a,
        "condition_rhs": spec.c / beta,
        "condition_holds": a > spec.c / beta,
        "fitted_rate": None,
        "r_squared": None,
        "relative_error": None,
        "status": "ok",
    }
    kernel = ExponentialKernel(spec.c, beta)
    try:
        solution = solve_integro_ode(IntegroODEProblem(a=a, k=kernel), spec.grid, fast=spec.fast)
        fit = fit_decay(solution, DecayModel.exponential, spec.fit_window)
    except DivergenceError as e:
        logger.error(f"Exponential cell a={a}, beta={beta} diverged: {e}")
        row["status"] = f"divergent at step {e.step}"
        return row
    except FitError as e:
        row["status"] = f"fit error: {e}"
        return row
    row.update(fitted_rate=fit.rate, r_squared=fit.r_squared)
    if theory < NO_DECAY_TOLERANCE or fit.rate <= 0:
        row["status"] = "no decay"
    else:
        row["relative_error"] = abs(fit.rate - theory) / theory
    return row


async def run_exp_grid(spec: ExpGridSpec, threads: int = 1) -> ExperimentReport:
    cells = [(spec, a, beta) for a in sorted(spec.a_values) for beta in sorted(spec.beta_values)]
    rows = await _gather_cells(cells, _exp_cell, threads, "Exponential grid")
    errors = [row["relative_error"] for row in rows if row["relative_error"] is not None]
    summary = []
    if errors:
        summary.append(
            {
                "cells": len(rows),
                "compared": len(errors),
                "mean_relative_error": float(np.mean(errors)),
                "max_relative_error": float(np.max(errors)),
            }
        )
    return ExperimentReport(kind=ExperimentKind.exp_grid, rows=rows, summary=summary)


def _dump_ensemble(ensemble: Ensemble, directory: Optional[Path], run_id: str, system: str) -> None:
    if directory is None:
        return
    for path in ensemble.paths:
        write_trajectory(path, dump_path(directory, run_id, system, path.batch))


class _PerturbationContext:
    """Everything shared by the cells of one perturbation experiment."""

    def __init__(self, spec: PerturbationSpec, order: Order):
        self.spec = spec
        self.order = order
        self.kernel = get_kernel(spec.kernel)
        self.weight = get_weight(spec.weight)
        self.cfg = SimConfig(
            dim=self.kernel.dim,
            gamma=spec.gamma,
            sigma=spec.sigma,
            grid=spec.grid,
            batches=spec.batches,
            seed=spec.seed,
            init=spec.init,
            fast=spec.fast,
        )
        self.pot = None
        self.params = None
        if order == Order.second:
            self.pot = Potential.from_config(spec.potential, self.kernel.dim)
            self.params = lyapunov_params(spec.gamma, self.pot.u, self.pot.R, self.pot.kappa0)

    @property
    def error_tag(self) -> ConditionTag:
        if self.order == Order.first:
            return ConditionTag.first_order_error
        return ConditionTag.second_order_error

    @property
    def moment_tag(self) -> ConditionTag:
        if self.order == Order.first:
            return ConditionTag.first_order_moment
        return ConditionTag.second_order_moment

    @property
    def functional(self) -> MomentFunctional:
        if self.order == Order.first:
            return MomentFunctional.diff_sq
        return MomentFunctional.lyapunov_sq

    @property
    def decay_model(self) -> DecayModel:
        return DecayModel.power_law if self.order == Order.first else DecayModel.exponential

    def check(self, tag: ConditionTag, norm):
        return check_condition(
            tag,
            self.spec.gamma,
            mu=self.weight.mu,
            h=self.weight,
            kernel_norm=norm,
            lam=None if self.params is None else self.params.lam,
        )


async def _perturbation_cell(
    ctx: _PerturbationContext,
    true_ensemble: Ensemble,
    family,
    alpha: float,
    threads: int,
    directory: Optional[Path],
) -> Dict[str, Any]:
    spec = ctx.spec
    perturbed = PerturbedKernel(ctx.kernel, family, alpha)
    error_norm = schur_norm(ctx.kernel - perturbed, ctx.weight, spec.norm_grid)
    perturbed_norm = schur_norm(perturbed, ctx.weight, spec.norm_grid)
    condition = ctx.check(ctx.error_tag, perturbed_norm)
    row = {
        "family": family.value,
        "alpha": alpha,
        "kernel_error_sq": None if error_norm.divergent else error_norm.squared,
        "perturbed_schur_norm": None if perturbed_norm.divergent else perturbed_norm.value,
        "condition_lhs": condition.lhs,
        "condition_rhs": condition.rhs,
        "condition_holds": condition.holds,
        "condition_checkable": condition.checkable,
        "negative_memory": perturbed.negative_memory,
        "bound_constant": None,
        "bound_argmax_time": None,
        "bound_stderr": None,
        "fitted_rate": None,
        "r_squared": None,
        "w2_bound_horizon": None,
        "w2_bound_sup": None,
        "status": "ok",
    }
    try:
        pert_ensemble = await simulate_ensemble(ctx.cfg, perturbed, ctx.order, ctx.pot, threads)
    except DivergenceError as e:
        logger.error(f"{family.value} alpha={alpha} diverged: {e}")
        row["status"] = f"divergent at step {e.step}"
        return row
    _dump_ensemble(pert_ensemble, directory, f"{family.value}-{alpha:g}", "perturbed")

    coupled = couple(true_ensemble, pert_ensemble)
    moment = ensemble_moments(coupled, ctx.functional, ctx.params)
    bound = empirical_sup_ratio(moment.mean, ctx.weight, offset=ctx.cfg.noise_trace)
    argmax = int(round(bound.argmax_time / ctx.cfg.grid.dt))
    floor = ctx.weight(bound.argmax_time) + bound.offset
    wasserstein = wasserstein_upper_bound(coupled)
    row.update(
        bound_constant=bound.value,
        bound_argmax_time=bound.argmax_time,
        bound_stderr=float(moment.stderr.values[argmax] / floor),
        w2_bound_horizon=wasserstein.at_horizon,
        w2_bound_sup=wasserstein.supremum,
    )
    if not np.any(moment.mean.values):
        row["status"] = "identical kernels"
        return row
    try:
        fit = fit_decay(moment.mean, ctx.decay_model, spec.fit_window, shift=spec.fit_shift)
        row.update(fitted_rate=fit.rate, r_squared=fit.r_squared)
    except FitError as e:
        row["status"] = f"fit error: {e}"
    return row


def _family_summary(order: Order, family, rows: List[Dict[str, Any]]) -> Dict[str, Any]:
    pairs = [
        (row["kernel_error_sq"], row["bound_constant"])
        for row in rows
        if row["kernel_error_sq"] is not None and row["bound_constant"] is not None
    ]
    negative = any(row["negative_memory"] for row in rows)
    summary = {
        "family": family.value,
        "cells": len(rows),
        "slope": None,
        "intercept": None,
        "pearson_r": None,
        "linearity_expected": (
            family == PerturbationFamily.translation if order == Order.first else not negative
        ),
        "negative_memory": negative,
        "status": "ok",
    }
    try:
        xs, ys = zip(*pairs) if pairs else ((), ())
        report = linearity_report(xs, ys)
    except FitError as e:
        summary["status"] = f"fit error: {e}"
        return summary
    summary.update(slope=report.slope, intercept=report.intercept, pearson_r=report.pearson_r)
    return summary


async def _run_perturbation(
    spec: PerturbationSpec, order: Order, threads: int, directory: Optional[Path]
) -> ExperimentReport:
    ctx = _PerturbationContext(spec, order)
    logger.info(
        f"{order.value}-order perturbation run: {ctx.kernel!r}, weight {ctx.weight!r}, "
        f"{spec.batches} batches on {spec.grid}"
    )
    warnings = []
    moment_norm = schur_norm(ctx.kernel, ctx.weight, spec.norm_grid)
    moment_condition = ctx.check(ctx.moment_tag, moment_norm)
    if not moment_condition.holds:
        warnings.append(f"{moment_condition.tag.value} does not hold")
    if order == Order.second:
        friction = check_condition(
            ConditionTag.second_order_friction,
            spec.gamma,
            lipschitz_g=ctx.pot.lipschitz_g,
            u=ctx.pot.u,
        )
        if not friction.holds:
            warnings.append("SecondOrderFriction does not hold")

    try:
        true_ensemble = await simulate_ensemble(ctx.cfg, ctx.kernel, order, ctx.pot, threads)
    except DivergenceError as e:
        logger.error(f"True system diverged, no cell can be evaluated: {e}")
        raise
    _dump_ensemble(true_ensemble, directory, "true", "true")
    moment_functional = (
        MomentFunctional.norm_sq if order == Order.first else MomentFunctional.lyapunov_sq
    )
    true_moment = ensemble_moments(true_ensemble, moment_functional, ctx.params)
    moment_bound = empirical_sup_ratio(true_moment.mean, ctx.weight, offset=ctx.cfg.noise_trace)

    rows = []
    families = sorted(spec.alphas, key=list(PerturbationFamily).index)
    cells = [(family, alpha) for family in families for alpha in sorted(spec.alphas[family])]
    for family, alpha in tqdm(cells, desc=f"{order.value}-order perturbations"):
        row = await _perturbation_cell(ctx, true_ensemble, family, alpha, threads, directory)
        row.update(
            moment_schur_norm=moment_norm.value,
            moment_condition_holds=moment_condition.holds,
            moment_bound_constant=moment_bound.value,
        )
        rows.append(row)

    summary = [
        _family_summary(order, family, [row for row in rows if row["family"] == family.value])
        for family in families
    ]
    kind = (
        ExperimentKind.first_order_perturb
        if order == Order.first
        else ExperimentKind.second_order_perturb
    )
    return ExperimentReport(kind=kind, rows=rows, summary=summary, warnings=warnings)


async def run_first_order_perturb(
    spec: FirstOrderPerturbSpec, threads: int = 1, directory: Optional[Path] = None
) -> ExperimentReport:
    return await _run_perturbation(spec, Order.first, threads, directory if spec.dump else None)


async def run_second_order_perturb(
    spec: SecondOrderPerturbSpec, threads: int = 1, directory: Optional[Path] = None
) -> ExperimentReport:
    return await _run_perturbation(spec, Order.second, threads, directory if spec.dump else None)


async def run_simulate(
    spec: SimulateSpec, threads: int = 1, directory: Optional[Path] = None
) -> ExperimentReport:
    """One ensemble with a trajectory dump per batch."""
    kernel = get_kernel(spec.kernel)
    pot = None
    if spec.order == Order.second:
        pot = Potential.from_config(spec.potential or PotentialConfig(), kernel.dim)
    cfg = SimConfig(
        dim=kernel.dim,
        gamma=spec.gamma,
        sigma=spec.sigma,
        grid=spec.grid,
        batches=spec.batches,
        seed=spec.seed,
        init=spec.init,
        fast=spec.fast,
    )
    rows = []
    try:
        ensemble = await simulate_ensemble(cfg, kernel, spec.order, pot, threads)
    except DivergenceError as e:
        logger.error(f"Simulation diverged: {e}")
        rows.append(
            {
                "batch": None,
                "system": "true",
                "final_norm_sq": None,
                "dump": None,
                "status": f"divergent at step {e.step}",
            }
        )
        return ExperimentReport(kind=ExperimentKind.simulate, rows=rows)
    for path in ensemble.paths:
        dump = None
        if directory is not None:
            dump = write_trajectory(path, dump_path(directory, "run", "true", path.batch))
        rows.append(
            {
                "batch": path.batch,
                "system": "true",
                "final_norm_sq": float(np.sum(path.states[-1] ** 2)),
                "dump": None if dump is None else str(dump.relative_to(directory)),
                "status": "ok",
            }
        )
    return ExperimentReport(kind=ExperimentKind.simulate, rows=rows)
