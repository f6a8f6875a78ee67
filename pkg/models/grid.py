import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from utils.errors import DomainError


class TimeGrid(BaseModel):
    """Uniform grid {0, dt, ..., n_steps * dt} shared by quadrature and simulation."""

    model_config = ConfigDict(frozen=True)

    dt: float = Field(..., gt=0, description="Time step")
    n_steps: int = Field(..., ge=2, description="Number of steps, horizon = n_steps * dt")

    @classmethod
    def from_horizon(cls, t_final: float, dt: float) -> "TimeGrid":
        return cls(dt=dt, n_steps=int(round(t_final / dt)))

    @property
    def horizon(self) -> float:
        return self.n_steps * self.dt

    @property
    def size(self) -> int:
        return self.n_steps + 1

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.size, dtype=np.float64) * self.dt

    def index_window(self, t_min: float, t_max: float) -> slice:
        lo = max(int(np.ceil(t_min / self.dt - 1e-9)), 0)
        hi = min(int(np.floor(t_max / self.dt + 1e-9)), self.n_steps)
        return slice(lo, hi + 1)

    def refined(self, factor: int = 2) -> "TimeGrid":
        return TimeGrid(dt=self.dt / factor, n_steps=self.n_steps * factor)

    def check_same(self, other: "TimeGrid") -> None:
        if self != other:
            raise DomainError(f"Grid mismatch: {self} vs {other}")


class GridFunction(BaseModel):
    """Values sampled on every point of a TimeGrid; scalar, vector or matrix valued."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    grid: TimeGrid
    values: np.ndarray
    warnings: list[str] = Field(default_factory=list)

    @field_validator("values", mode="before")
    def values_must_be_float_array(cls, v):
        return np.asarray(v, dtype=np.float64)

    @model_validator(mode="after")
    def values_must_match_grid(self):
        if self.values.shape[0] != self.grid.size:
            raise ValueError(
                f"values has {self.values.shape[0]} points, grid needs {self.grid.size}"
            )
        if not np.all(np.isfinite(self.values)):
            raise ValueError("values must be finite")
        return self

    @classmethod
    def from_callable(cls, grid: TimeGrid, func) -> "GridFunction":
        return cls(grid=grid, values=np.asarray(func(grid.times), dtype=np.float64))

    @classmethod
    def constant(cls, grid: TimeGrid, value: float) -> "GridFunction":
        return cls(grid=grid, values=np.full(grid.size, float(value)))

    @property
    def times(self) -> np.ndarray:
        return self.grid.times

    def window(self, t_min: float, t_max: float) -> tuple[np.ndarray, np.ndarray]:
        idx = self.grid.index_window(t_min, t_max)
        return self.grid.times[idx], self.values[idx]

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))
