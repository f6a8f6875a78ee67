from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Optional

import numpy as np

from utils.errors import DivergenceError, DomainError


@dataclass(frozen=True)
class ExponentialModes:
    """
    K(tau) = sum_k Re(amplitudes[k] * exp(-rates[k] * tau)) * q_k q_k^T

    with q_k the rows of `directions`. Memory integrals against such kernels obey
    an exact one-step recursion per mode.
    """

    directions: np.ndarray  # (m, d) real
    amplitudes: np.ndarray  # (m,) complex
    rates: np.ndarray  # (m,) complex, Re(rate) > 0 for decay

    def scaled(self, coef: float) -> "ExponentialModes":
        return ExponentialModes(self.directions, self.amplitudes * coef, self.rates)

    def lags(self, taus: np.ndarray) -> np.ndarray:
        weights = np.real(self.amplitudes[None, :] * np.exp(-np.outer(taus, self.rates)))
        return np.einsum("nk,ki,kj->nij", weights, self.directions, self.directions)


def modes_laplace(modes: ExponentialModes, mu: float) -> float:
    if modes.rates.size and np.min(modes.rates.real) + mu <= 0:
        raise DivergenceError(f"Laplace transform diverges for mu={mu}")
    weights = modes.directions[:, 0] ** 2
    return float(np.sum(weights * np.real(modes.amplitudes / (modes.rates + mu))))


class BaseKernel(ABC):
    """
    Matrix-valued two-time memory kernel K(t, s), 0 <= s <= t.

    Translation-invariant kernels implement `lags`; two-time kernels override
    `row`. Every evaluation returns a fresh array, so kernels stay immutable.
    """

    dim: int = 1
    translation_invariant: bool = True
    negative_memory: bool = False

    @abstractmethod
    def lags(self, taus: np.ndarray) -> np.ndarray:
        """K(tau) for an array of lags, shape (n, d, d)."""

    def row(self, t: float, s: np.ndarray) -> np.ndarray:
        """K(t, s_j) for all s_j, shape (n, d, d)."""
        return self.lags(t - np.asarray(s, dtype=np.float64))

    def evaluate(self, t: float, s: float) -> np.ndarray:
        if s < 0 or t < 0:
            raise DomainError(f"Kernel arguments must be nonnegative, got t={t}, s={s}")
        if s > t:
            raise DomainError(f"Kernel needs s <= t, got t={t}, s={s}")
        return self.row(t, np.array([s]))[0]

    def scalar_lags(self, taus: np.ndarray) -> np.ndarray:
        if self.dim != 1:
            raise DomainError(f"Scalar values requested from a {self.dim}x{self.dim} kernel")
        return self.lags(np.asarray(taus, dtype=np.float64))[:, 0, 0]

    def exponential_modes(self) -> Optional[ExponentialModes]:
        return None

    def laplace_closed_form(self, mu: float) -> Optional[float]:
        """Closed-form transform when the family has one, None otherwise."""
        modes = self.exponential_modes()
        if modes is None or self.dim != 1:
            return None
        return modes_laplace(modes, mu)

    def perturb(self, family, alpha: float) -> Optional["BaseKernel"]:
        """Equivalent closed-form kernel for a perturbation, None if there is none."""
        return None

    def __add__(self, other: "BaseKernel") -> "BaseKernel":
        from kernels.combination import KernelSum

        return KernelSum([(1.0, self), (1.0, other)])

    def __sub__(self, other: "BaseKernel") -> "BaseKernel":
        from kernels.combination import KernelSum

        return KernelSum([(1.0, self), (-1.0, other)])

    def __rmul__(self, coef: float) -> "BaseKernel":
        from kernels.combination import KernelSum

        return KernelSum([(float(coef), self)])

    def __neg__(self) -> "BaseKernel":
        return -1.0 * self
