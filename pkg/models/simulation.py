from enum import Enum
from typing import List, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from models.grid import TimeGrid


class Order(str, Enum):
    first = "First"
    second = "Second"


class InitialCondition(BaseModel):
    """
    Distribution of the initial state: V_0 for first order, (X_0, V_0) for second.

    `mean` and `cov` default to zero and the identity of the state size.
    """

    kind: Literal["point", "gaussian"] = "gaussian"
    mean: Optional[List[float]] = None
    cov: Optional[List[List[float]]] = None

    def sample(self, size: int, normals: np.ndarray) -> np.ndarray:
        mean = np.zeros(size) if self.mean is None else np.asarray(self.mean, dtype=np.float64)
        if mean.shape != (size,):
            raise ValueError(f"Initial mean has shape {mean.shape}, state size is {size}")
        if self.kind == "point":
            return mean.copy()
        if self.cov is None:
            return mean + normals
        factor = np.linalg.cholesky(np.asarray(self.cov, dtype=np.float64))
        return mean + factor @ normals


class SimConfig(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    dim: int = Field(..., ge=1)
    gamma: float = Field(..., gt=0, description="Friction")
    sigma: np.ndarray = Field(..., description="Noise amplitude, d x d; a scalar means sigma * Id")
    grid: TimeGrid
    batches: int = Field(default=1, ge=1)
    seed: int = Field(default=0, ge=0, lt=2**64)
    init: InitialCondition = Field(default_factory=InitialCondition)
    fast: bool = Field(default=False, description="Use the exact modal recursion when available")

    @model_validator(mode="before")
    @classmethod
    def expand_sigma(cls, data):
        if isinstance(data, dict) and np.ndim(data.get("sigma", 0.0)) == 0:
            data = dict(data)
            data["sigma"] = float(data.get("sigma", 0.0)) * np.eye(int(data.get("dim", 1)))
        return data

    @field_validator("sigma")
    def sigma_must_be_finite(cls, v):
        v = np.asarray(v, dtype=np.float64)
        if not np.all(np.isfinite(v)):
            raise ValueError("sigma entries must be finite")
        return v

    @model_validator(mode="after")
    def sigma_must_match_dim(self):
        if self.sigma.shape != (self.dim, self.dim):
            raise ValueError(f"sigma has shape {self.sigma.shape}, expected {(self.dim,) * 2}")
        return self

    @property
    def noise_trace(self) -> float:
        """Tr(sigma sigma^T), the stationary floor of second moments."""
        return float(np.sum(self.sigma**2))


class Trajectory(BaseModel):
    """One batch path; states are V (first order) or (X, V) stacked (second order)."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    grid: TimeGrid
    states: np.ndarray
    order: Order = Order.first
    batch: int = 0

    @model_validator(mode="after")
    def states_must_fit_grid(self):
        if self.states.ndim != 2 or self.states.shape[0] != self.grid.size:
            raise ValueError(f"states shape {self.states.shape} does not fit {self.grid}")
        if not np.all(np.isfinite(self.states)):
            raise ValueError("states must be finite")
        return self

    @property
    def dim(self) -> int:
        return self.states.shape[1] // (2 if self.order == Order.second else 1)

    @property
    def positions(self) -> np.ndarray:
        if self.order != Order.second:
            raise ValueError("First-order trajectories carry no positions")
        return self.states[:, : self.dim]

    @property
    def velocities(self) -> np.ndarray:
        return self.states[:, -self.dim :]


class NoiseKey(BaseModel):
    """Everything needed to regenerate one batch's Gaussian increments."""

    model_config = ConfigDict(frozen=True)

    seed: int
    batch: int


class Ensemble(BaseModel):
    paths: List[Trajectory]
    ledger: List[NoiseKey]

    @model_validator(mode="after")
    def ledger_must_cover_paths(self):
        if len(self.paths) != len(self.ledger):
            raise ValueError("Every path needs exactly one noise key")
        return self

    @property
    def order(self) -> Order:
        return self.paths[0].order

    @property
    def grid(self) -> TimeGrid:
        return self.paths[0].grid

    def stacked(self) -> np.ndarray:
        """States of all batches, shape (batches, n_steps + 1, k)."""
        return np.stack([p.states for p in self.paths])


class CoupledEnsemble(BaseModel):
    """True and perturbed systems; batch b of both consumed the same increments."""

    true_paths: List[Trajectory]
    pert_paths: List[Trajectory]
    ledger: List[NoiseKey]

    @model_validator(mode="after")
    def systems_must_match(self):
        if not len(self.true_paths) == len(self.pert_paths) == len(self.ledger):
            raise ValueError("True and perturbed ensembles need equal batch counts")
        for a, b in zip(self.true_paths, self.pert_paths):
            if a.grid != b.grid or a.order != b.order:
                raise ValueError("True and perturbed paths must share grid and order")
        return self

    @property
    def order(self) -> Order:
        return self.true_paths[0].order

    @property
    def grid(self) -> TimeGrid:
        return self.true_paths[0].grid

    def differences(self) -> np.ndarray:
        """(true - perturbed) states, shape (batches, n_steps + 1, k)."""
        return np.stack([a.states - b.states for a, b in zip(self.true_paths, self.pert_paths)])


class LyapunovParams(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    lam: float = Field(..., gt=0, le=0.125)
    gamma: float = Field(..., gt=0)
    u: float = Field(..., gt=0)
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
