from enum import Enum
from typing import Annotated, Any, Dict, List, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, TypeAdapter, field_validator

from models.grid import TimeGrid
from models.kernel import (
    ExponentialWeightConfig,
    KernelConfig,
    MatrixExponentialConfig,
    PerturbationFamily,
    PotentialConfig,
    PowerLawConfig,
    PowerLawWeightConfig,
    WeightConfig,
)
from models.simulation import InitialCondition, Order


class ExperimentKind(str, Enum):
    powerlaw_grid = "PowerLawGrid"
    exp_grid = "ExpGrid"
    first_order_perturb = "FirstOrderPerturb"
    second_order_perturb = "SecondOrderPerturb"
    simulate = "Simulate"


def _nonempty(values: List[float], name: str) -> List[float]:
    if not values:
        raise ValueError(f"{name} must not be empty")
    return values


class BaseExperiment(BaseModel):
    model_config = ConfigDict(extra="forbid")

    seed: int = Field(default=0, ge=0, lt=2**64)
    dt: float = Field(default=0.01, gt=0)
    t_final: float = Field(default=100.0, gt=0)

    @property
    def grid(self) -> TimeGrid:
        return TimeGrid.from_horizon(self.t_final, self.dt)


class PowerLawGridSpec(BaseExperiment):
    """x' = -a x + k*x with k = c (t + alpha)^-beta over an (a, beta) grid."""

    kind: Literal[ExperimentKind.powerlaw_grid] = ExperimentKind.powerlaw_grid
    a_values: List[float]
    beta_values: List[float]
    c: float = Field(default=1.0, gt=0)
    alpha: float = Field(default=0.1, gt=0)
    fit_window: Tuple[float, float] = (5.0, 100.0)

    @field_validator("a_values", "beta_values")
    def ranges_must_be_nonempty(cls, v, info):
        return _nonempty(v, info.field_name)

    @field_validator("beta_values")
    def betas_must_be_integrable(cls, v):
        if any(b <= 1 for b in v):
            raise ValueError("every beta must exceed 1")
        return v


class ExpGridSpec(BaseExperiment):
    """x' = -a x + k*x with k = c e^{-beta t}; fitted rates against the characteristic root."""

    kind: Literal[ExperimentKind.exp_grid] = ExperimentKind.exp_grid
    a_values: List[float]
    beta_values: List[float]
    c: float = Field(default=1.0, gt=0)
    fast: bool = Field(default=True, description="Exact modal recursion for the memory sum")
    fit_window: Optional[Tuple[float, float]] = Field(
        default=None, description="Defaults to [T/2, T]"
    )

    @field_validator("a_values", "beta_values")
    def ranges_must_be_nonempty(cls, v, info):
        return _nonempty(v, info.field_name)


class PerturbationSpec(BaseExperiment):
    gamma: float = Field(..., gt=0)
    sigma: float = Field(..., ge=0, description="Isotropic noise amplitude")
    batches: int = Field(default=20, ge=1)
    alphas: Dict[PerturbationFamily, List[float]]
    fit_window: Tuple[float, float]
    fit_shift: float = 0.0
    norm_horizon: float = Field(
        default=200.0, gt=0, description="Horizon of the grid used for Schur norms"
    )
    fast: bool = False
    dump: bool = False
    init: InitialCondition = Field(default_factory=InitialCondition)

    @field_validator("alphas")
    def alpha_ranges_must_be_nonempty(cls, v):
        if not v:
            raise ValueError("at least one perturbation family is required")
        for family, values in v.items():
            _nonempty(values, f"alphas.{family.value}")
        return v

    @property
    def norm_grid(self) -> TimeGrid:
        return TimeGrid.from_horizon(max(self.norm_horizon, self.t_final), self.dt)


class FirstOrderPerturbSpec(PerturbationSpec):
    kind: Literal[ExperimentKind.first_order_perturb] = ExperimentKind.first_order_perturb
    kernel: KernelConfig = Field(default_factory=lambda: PowerLawConfig(c=1.0, alpha=1.0, beta=4.0))
    weight: WeightConfig = Field(default_factory=PowerLawWeightConfig)


class SecondOrderPerturbSpec(PerturbationSpec):
    kind: Literal[ExperimentKind.second_order_perturb] = ExperimentKind.second_order_perturb
    kernel: KernelConfig = Field(default_factory=MatrixExponentialConfig)
    weight: WeightConfig = Field(default_factory=ExponentialWeightConfig)
    potential: PotentialConfig = Field(default_factory=PotentialConfig)


class SimulateSpec(BaseExperiment):
    kind: Literal[ExperimentKind.simulate] = ExperimentKind.simulate
    order: Order = Order.first
    kernel: KernelConfig = Field(default_factory=PowerLawConfig)
    potential: Optional[PotentialConfig] = None
    gamma: float = Field(default=3.0, gt=0)
    sigma: float = Field(default=0.0, ge=0)
    batches: int = Field(default=1, ge=1)
    fast: bool = False
    init: InitialCondition = Field(default_factory=InitialCondition)


ExperimentSpec = Annotated[
    Union[
        PowerLawGridSpec, ExpGridSpec, FirstOrderPerturbSpec, SecondOrderPerturbSpec, SimulateSpec
    ],
    Field(discriminator="kind"),
]

experiment_adapter = TypeAdapter(ExperimentSpec)

SPEC_TYPES = {
    ExperimentKind.powerlaw_grid: PowerLawGridSpec,
    ExperimentKind.exp_grid: ExpGridSpec,
    ExperimentKind.first_order_perturb: FirstOrderPerturbSpec,
    ExperimentKind.second_order_perturb: SecondOrderPerturbSpec,
    ExperimentKind.simulate: SimulateSpec,
}


def _spaced(lo: float, hi: float, n: int) -> List[float]:
    return [float(v) for v in np.round(np.linspace(lo, hi, n), 10)]


FULL_PRESETS: Dict[ExperimentKind, Dict[str, Any]] = {
    ExperimentKind.powerlaw_grid: {
        "a_values": _spaced(5, 50, 10),
        "beta_values": _spaced(1.05, 20, 20),
        "dt": 0.01,
        "t_final": 100.0,
    },
    ExperimentKind.exp_grid: {
        "a_values": _spaced(1, 10, 10),
        "beta_values": _spaced(1, 6, 11),
        "dt": 0.005,
        "t_final": 100.0,
    },
    ExperimentKind.first_order_perturb: {
        "gamma": 3.0,
        "sigma": 1e-3,
        "batches": 20,
        "dt": 0.01,
        "t_final": 100.0,
        "fit_window": (1.0, 5.0),
        "fit_shift": 1.0,
        "alphas": {
            PerturbationFamily.translation: _spaced(1, 3, 10),
            PerturbationFamily.cutoff: _spaced(0.1, 3, 10),
            PerturbationFamily.dilation: _spaced(0, 1, 10),
            PerturbationFamily.oscillation: _spaced(0.1, 4, 10),
        },
    },
    ExperimentKind.second_order_perturb: {
        "gamma": 10.0,
        "sigma": 1e-4,
        "batches": 20,
        "dt": 0.005,
        "t_final": 30.0,
        "fit_window": (5.0, 20.0),
        "fast": True,
        "alphas": {
            PerturbationFamily.translation: _spaced(0, 0.5, 10),
            PerturbationFamily.cutoff: _spaced(1, 20, 10),
            PerturbationFamily.dilation: _spaced(0, 1, 10),
            PerturbationFamily.oscillation: _spaced(0, 1, 10),
        },
    },
    ExperimentKind.simulate: {"dt": 0.01, "t_final": 10.0},
}

DESK_PRESETS: Dict[ExperimentKind, Dict[str, Any]] = {
    ExperimentKind.powerlaw_grid: {
        "a_values": [5.0, 16.0, 27.0, 38.0, 50.0],
        "beta_values": [1.5, 2.0, 3.0, 5.0, 8.0],
    },
    ExperimentKind.exp_grid: {
        "a_values": _spaced(1, 10, 5),
        "beta_values": _spaced(1, 6, 5),
    },
    ExperimentKind.first_order_perturb: {
        "batches": 8,
        "t_final": 50.0,
        "alphas": {
            PerturbationFamily.translation: _spaced(1, 3, 6),
            PerturbationFamily.cutoff: _spaced(0.1, 3, 6),
            PerturbationFamily.dilation: _spaced(0, 1, 6),
            PerturbationFamily.oscillation: _spaced(0.1, 4, 6),
        },
    },
    ExperimentKind.second_order_perturb: {
        "batches": 8,
        "alphas": {
            PerturbationFamily.translation: _spaced(0, 0.5, 5),
            PerturbationFamily.cutoff: _spaced(1, 20, 5),
            PerturbationFamily.dilation: _spaced(0, 1, 5),
            PerturbationFamily.oscillation: _spaced(0, 1, 5),
        },
    },
    ExperimentKind.simulate: {},
}


def preset(kind: ExperimentKind, desk_scale: bool = False) -> Dict[str, Any]:
    values = {"kind": kind, **FULL_PRESETS[kind]}
    if desk_scale:
        values.update(DESK_PRESETS[kind])
    return values


class ExperimentReport(BaseModel):
    """Rows are one grid cell each; summary rows aggregate per family."""

    kind: ExperimentKind
    rows: List[Dict[str, Any]]
    summary: List[Dict[str, Any]] = Field(default_factory=list)
    warnings: List[str] = Field(default_factory=list)

    @property
    def divergent_cells(self) -> int:
        return sum(str(row.get("status", "")).startswith("divergent") for row in self.rows)
