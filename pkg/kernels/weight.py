from abc import ABC, abstractmethod
from typing import Optional

import numpy as np

from models.grid import GridFunction
from utils.errors import DivergenceError, DomainError


class BaseWeight(ABC):
    """Positive comparison function h(t) together with its U(mu) index."""

    mu: float = 0.0

    @abstractmethod
    def __call__(self, t: np.ndarray) -> np.ndarray:
        pass

    @abstractmethod
    def scaled(self, factor: float) -> "BaseWeight":
        pass

    def laplace_closed_form(self, mu: float) -> Optional[float]:
        return None

    @property
    def subexponential(self) -> bool:
        return self.mu == 0.0

    def sample(self, grid) -> GridFunction:
        return GridFunction(grid=grid, values=self(grid.times))


class PowerLawWeight(BaseWeight):
    """h(t) = scale (t + alpha)^-beta, a member of U(0)."""

    def __init__(self, alpha: float = 1.0, beta: float = 6.0, scale: float = 1.0):
        if beta <= 1:
            raise DomainError(f"Power-law weight needs beta > 1, got {beta}")
        if alpha <= 0 or scale <= 0:
            raise DomainError("Power-law weight needs positive alpha and scale")
        self.alpha = float(alpha)
        self.beta = float(beta)
        self.scale = float(scale)
        self.mu = 0.0

    def __repr__(self) -> str:
        return f"PowerLawWeight(alpha={self.alpha}, beta={self.beta}, scale={self.scale})"

    def __call__(self, t):
        return self.scale * (np.asarray(t, dtype=np.float64) + self.alpha) ** (-self.beta)

    def scaled(self, factor: float) -> "PowerLawWeight":
        return PowerLawWeight(self.alpha, self.beta, self.scale * factor)

    def laplace_closed_form(self, mu: float) -> Optional[float]:
        if mu < 0:
            raise DivergenceError(f"Transform of {self!r} diverges for mu={mu} < 0")
        if mu == 0:
            return self.scale * self.alpha ** (1 - self.beta) / (self.beta - 1)
        return None


class ExponentialWeight(BaseWeight):
    """h(t) = scale e^{-rate t}; mu is user supplied and must exceed -rate."""

    def __init__(self, rate: float, mu: float, scale: float = 1.0):
        if rate <= 0 or scale <= 0:
            raise DomainError("Exponential weight needs positive rate and scale")
        if mu > 0:
            raise DomainError(f"U(mu) index must be <= 0, got {mu}")
        if not mu > -rate:
            raise DomainError(f"mu must exceed -rate={-rate}, got {mu}")
        self.rate = float(rate)
        self.scale = float(scale)
        self.mu = float(mu)

    def __repr__(self) -> str:
        return f"ExponentialWeight(rate={self.rate}, mu={self.mu}, scale={self.scale})"

    def __call__(self, t):
        return self.scale * np.exp(-self.rate * np.asarray(t, dtype=np.float64))

    def scaled(self, factor: float) -> "ExponentialWeight":
        return ExponentialWeight(self.rate, self.mu, self.scale * factor)

    def laplace_closed_form(self, mu: float) -> float:
        if self.rate + mu <= 0:
            raise DivergenceError(f"Transform of {self!r} diverges for mu={mu}")
        return self.scale / (self.rate + mu)


class TabulatedWeight(BaseWeight):
    """A weight known only through its samples; linear interpolation in between."""

    def __init__(self, samples: GridFunction, mu: float = 0.0):
        if np.any(samples.values <= 0):
            raise DomainError("Weight samples must be positive")
        self.samples = samples
        self.mu = float(mu)

    def __repr__(self) -> str:
        return f"TabulatedWeight(n={self.samples.grid.size}, mu={self.mu})"

    def __call__(self, t):
        return np.interp(np.asarray(t, dtype=np.float64), self.samples.times, self.samples.values)

    def scaled(self, factor: float) -> "TabulatedWeight":
        return TabulatedWeight(
            GridFunction(grid=self.samples.grid, values=self.samples.values * factor), self.mu
        )
