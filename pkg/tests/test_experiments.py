import asyncio

import numpy as np
import pytest
from pydantic import ValidationError

from models.experiment import (
    ExperimentKind,
    ExpGridSpec,
    FirstOrderPerturbSpec,
    PowerLawGridSpec,
    SecondOrderPerturbSpec,
    SimulateSpec,
    experiment_adapter,
    preset,
)
from kernels import PerturbedKernel, get_kernel, get_weight
from models.kernel import PerturbationFamily
from service.analysis import threshold_f
from service.experiments import (
    run_exp_grid,
    run_first_order_perturb,
    run_powerlaw_grid,
    run_second_order_perturb,
    run_simulate,
)
from service.norms import schur_norm
from service.transforms import laplace_transform


def _median_rate(rows, family):
    rates = [r["fitted_rate"] for r in rows if r["family"] == family and r["fitted_rate"]]
    return float(np.median(rates)) if rates else None


def test_below_threshold_cell_has_zero_ratio():
    spec = PowerLawGridSpec(
        a_values=[50.0], beta_values=[4.0], t_final=10.0, fit_window=(5.0, 10.0)
    )
    report = asyncio.run(run_powerlaw_grid(spec))
    (row,) = report.rows
    assert row["ratio"] == 0.0
    assert row["status"].startswith("below threshold")
    assert not row["condition_holds"]
    assert report.divergent_cells == 0


@pytest.mark.slow
def test_above_threshold_cell_recovers_the_exponent():
    spec = PowerLawGridSpec(a_values=[50.0], beta_values=[2.0])
    (row,) = asyncio.run(run_powerlaw_grid(spec, threads=2)).rows
    assert row["condition_holds"]
    assert 0.9 <= row["ratio"] <= 1.1


def test_grid_rows_are_sorted():
    spec = PowerLawGridSpec(
        a_values=[50.0, 5.0], beta_values=[8.0, 4.0], t_final=6.0, fit_window=(5.0, 6.0)
    )
    rows = asyncio.run(run_powerlaw_grid(spec, threads=3)).rows
    assert [(r["a"], r["beta"]) for r in rows] == [(5.0, 4.0), (5.0, 8.0), (50.0, 4.0), (50.0, 8.0)]


@pytest.mark.parametrize(
    "changes",
    [{"beta_values": []}, {"beta_values": [1.0]}, {"a_values": []}, {"unknown": 1}],
)
def test_grid_validation(changes):
    values = {"a_values": [5.0], "beta_values": [2.0], **changes}
    with pytest.raises(ValidationError):
        PowerLawGridSpec(**values)


def test_exponential_cell_matches_theory():
    spec = ExpGridSpec(a_values=[3.0], beta_values=[2.0], dt=0.005, t_final=100.0)
    report = asyncio.run(run_exp_grid(spec))
    (row,) = report.rows
    assert row["theory_rate"] == pytest.approx((5 - np.sqrt(5)) / 2)
    assert row["condition_lhs"] == 3.0
    assert row["condition_rhs"] == 0.5
    assert row["condition_holds"]
    assert row["relative_error"] <= 0.05
    assert report.summary[0]["compared"] == 1


def test_critical_exponential_cell_does_not_decay():
    spec = ExpGridSpec(a_values=[2.0], beta_values=[0.5], c=1.0, t_final=20.0)
    (row,) = asyncio.run(run_exp_grid(spec)).rows
    assert row["status"] == "no decay"
    assert row["condition_rhs"] == 2.0
    assert not row["condition_holds"]
    assert row["relative_error"] is None


def test_first_order_perturbation_rows(tmp_path):
    spec = FirstOrderPerturbSpec(
        gamma=3.0,
        sigma=1e-3,
        batches=2,
        t_final=10.0,
        fit_window=(1.0, 5.0),
        fit_shift=1.0,
        norm_horizon=50.0,
        dump=True,
        alphas={"cutoff": [0.5], "translation": [1.0, 0.0]},
    )
    report = asyncio.run(run_first_order_perturb(spec, threads=2, directory=tmp_path))
    assert [(r["family"], r["alpha"]) for r in report.rows] == [
        ("translation", 0.0),
        ("translation", 1.0),
        ("cutoff", 0.5),
    ]
    identical = report.rows[0]
    assert identical["status"] == "identical kernels"
    assert identical["kernel_error_sq"] == 0.0
    assert identical["bound_constant"] == 0.0
    assert identical["condition_holds"]
    for row in report.rows[1:]:
        assert row["kernel_error_sq"] > 0
        assert row["bound_constant"] > 0
        assert row["status"] == "ok"
    assert [s["family"] for s in report.summary] == ["translation", "cutoff"]
    assert report.summary[0]["linearity_expected"]
    assert report.summary[0]["status"].startswith("fit error")
    assert (tmp_path / "dumps" / "true" / "true" / "1.csv").exists()
    assert (tmp_path / "dumps" / "translation-1" / "perturbed" / "0.csv").exists()


def test_second_order_perturbation_rows():
    spec = SecondOrderPerturbSpec(
        gamma=10.0,
        sigma=1e-4,
        batches=2,
        dt=0.01,
        t_final=5.0,
        fit_window=(1.0, 5.0),
        norm_horizon=50.0,
        fast=True,
        alphas={"oscillation": [0.5], "translation": [0.2]},
    )
    report = asyncio.run(run_second_order_perturb(spec))
    translation, oscillation = report.rows
    assert translation["family"] == "translation"
    assert not translation["negative_memory"]
    assert oscillation["negative_memory"]
    assert all(row["moment_bound_constant"] > 0 for row in report.rows)
    assert not report.summary[1]["linearity_expected"]


def _perturbed_norm(spec, family, alpha):
    perturbed = PerturbedKernel(get_kernel(spec.kernel), family, alpha)
    weight = get_weight(spec.weight)
    return schur_norm(perturbed, weight, spec.norm_grid).value, laplace_transform(weight, weight.mu)


def test_first_order_error_condition_uses_the_perturbed_kernel():
    spec = FirstOrderPerturbSpec(
        gamma=3.0,
        sigma=0.0,
        batches=1,
        t_final=2.0,
        fit_window=(1.0, 2.0),
        norm_horizon=50.0,
        alphas={"translation": [1.0]},
    )
    (row,) = asyncio.run(run_first_order_perturb(spec)).rows
    norm, h_hat = _perturbed_norm(spec, PerturbationFamily.translation, 1.0)
    assert row["perturbed_schur_norm"] == pytest.approx(norm, rel=1e-12)
    assert row["condition_lhs"] == pytest.approx(6.0)
    assert row["condition_rhs"] == pytest.approx(2 * norm * np.sqrt(2 * h_hat), rel=1e-12)
    assert row["condition_rhs"] != pytest.approx(
        2 * np.sqrt(row["kernel_error_sq"]) * np.sqrt(2 * h_hat), rel=1e-6
    )
    assert row["condition_holds"]


def test_second_order_error_condition_uses_the_perturbed_kernel():
    spec = SecondOrderPerturbSpec(
        gamma=10.0,
        sigma=0.0,
        batches=1,
        dt=0.01,
        t_final=1.0,
        fit_window=(0.5, 1.0),
        norm_horizon=50.0,
        fast=True,
        alphas={"cutoff": [1.0]},
    )
    (row,) = asyncio.run(run_second_order_perturb(spec)).rows
    norm, h_hat = _perturbed_norm(spec, PerturbationFamily.cutoff, 1.0)
    assert row["condition_rhs"] == pytest.approx(4 * np.sqrt(norm**2 * h_hat), rel=1e-12)


def test_simulate_dumps(tmp_path):
    spec = SimulateSpec(
        t_final=1.0, batches=2, sigma=0.1, init={"kind": "point", "mean": [1.0]}
    )
    report = asyncio.run(run_simulate(spec, directory=tmp_path))
    assert [row["batch"] for row in report.rows] == [0, 1]
    first = (tmp_path / "dumps" / "run" / "true" / "0.csv").read_text()
    assert first.splitlines()[0] == "t,component_0"
    assert first.splitlines()[1] == "0,1"

    again = tmp_path / "again"
    asyncio.run(run_simulate(spec, directory=again))
    assert (again / "dumps" / "run" / "true" / "0.csv").read_text() == first


def test_second_order_simulation_defaults_the_potential():
    spec = SimulateSpec(
        order="Second",
        kernel={"type": "matrix_exponential"},
        gamma=10.0,
        t_final=1.0,
    )
    (row,) = asyncio.run(run_simulate(spec)).rows
    assert row["status"] == "ok"
    assert row["dump"] is None


def test_spec_adapter_dispatches_on_kind():
    spec = experiment_adapter.validate_python(preset(ExperimentKind.exp_grid, desk_scale=True))
    assert isinstance(spec, ExpGridSpec)
    assert len(spec.a_values) == 5
    assert spec.dt == 0.005


@pytest.mark.slow
def test_desk_powerlaw_grid():
    spec = experiment_adapter.validate_python(preset(ExperimentKind.powerlaw_grid, True))
    report = asyncio.run(run_powerlaw_grid(spec, threads=4))
    assert len(report.rows) == 25
    for row in report.rows:
        f = threshold_f(1.0, 0.1, row["beta"])
        if row["a"] > 1.2 * f:
            assert 0.9 <= row["ratio"] <= 1.1
        if row["a"] < f:
            assert row["ratio"] == 0.0


@pytest.mark.slow
def test_desk_exp_grid():
    spec = experiment_adapter.validate_python(preset(ExperimentKind.exp_grid, True))
    summary = asyncio.run(run_exp_grid(spec, threads=4)).summary[0]
    assert summary["mean_relative_error"] <= 0.05
    assert summary["max_relative_error"] <= 0.10


@pytest.mark.slow
def test_desk_first_order_perturbation():
    spec = experiment_adapter.validate_python(preset(ExperimentKind.first_order_perturb, True))
    report = asyncio.run(run_first_order_perturb(spec, threads=4))
    translation = next(s for s in report.summary if s["family"] == "translation")
    assert translation["pearson_r"] >= 0.95
    rates = [_median_rate(report.rows, f.value) for f in PerturbationFamily]
    assert sum(r is not None and 7.0 <= r <= 9.0 for r in rates) >= 3


@pytest.mark.slow
def test_desk_second_order_perturbation():
    spec = experiment_adapter.validate_python(preset(ExperimentKind.second_order_perturb, True))
    report = asyncio.run(run_second_order_perturb(spec, threads=4))
    for summary in report.summary:
        if summary["family"] in ("translation", "dilation", "cutoff"):
            assert summary["pearson_r"] >= 0.9
    rates = [r["fitted_rate"] for r in report.rows if r["fitted_rate"]]
    assert 0.8 <= float(np.median(rates)) <= 1.2
