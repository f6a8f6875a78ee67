from typing import Optional

import numpy as np

from kernels.base import BaseKernel, ExponentialModes
from models.kernel import PerturbationFamily
from utils.errors import DivergenceError, DomainError


class PerturbedKernel(BaseKernel):
    """
    A perturbation of a base kernel, used as the estimated kernel K~.

    Translation and dilation follow the base family's own conventions
    (`BaseKernel.perturb`); cutoff multiplies by 1_{t-s <= alpha}, oscillation
    by cos(alpha (t-s)).
    """

    def __init__(self, base: BaseKernel, family: PerturbationFamily, alpha: float):
        if alpha < 0:
            raise DomainError(f"Perturbation strength must be nonnegative, got {alpha}")
        self.base = base
        self.family = PerturbationFamily(family)
        self.alpha = float(alpha)
        self.dim = base.dim
        self.translation_invariant = base.translation_invariant
        self.negative_memory = base.negative_memory or (
            self.family == PerturbationFamily.oscillation and self.alpha > 0
        )
        self._resolved: Optional[BaseKernel] = None
        if self.family in (PerturbationFamily.translation, PerturbationFamily.dilation):
            self._resolved = base.perturb(self.family, self.alpha)
            if self._resolved is None:
                raise DomainError(f"{self.family.value} is not defined for {base!r}")

    def __repr__(self) -> str:
        return f"PerturbedKernel({self.base!r}, {self.family.value}, alpha={self.alpha})"

    def _factor(self, taus: np.ndarray) -> np.ndarray:
        if self.family == PerturbationFamily.cutoff:
            return (taus <= self.alpha).astype(np.float64)
        return np.cos(self.alpha * taus)

    def lags(self, taus: np.ndarray) -> np.ndarray:
        taus = np.asarray(taus, dtype=np.float64)
        if self._resolved is not None:
            return self._resolved.lags(taus)
        return self.base.lags(taus) * self._factor(taus)[:, None, None]

    def row(self, t: float, s: np.ndarray) -> np.ndarray:
        s = np.asarray(s, dtype=np.float64)
        if self._resolved is not None:
            return self._resolved.row(t, s)
        return self.base.row(t, s) * self._factor(t - s)[:, None, None]

    def exponential_modes(self) -> Optional[ExponentialModes]:
        if self._resolved is not None:
            return self._resolved.exponential_modes()
        modes = self.base.exponential_modes()
        if modes is None or self.family == PerturbationFamily.cutoff:
            return None
        if self.alpha == 0:
            return modes
        # Re(c e^{-l t}) cos(a t) = Re(c/2 e^{-(l - ia) t}) + Re(c/2 e^{-(l + ia) t})
        return ExponentialModes(
            directions=np.concatenate([modes.directions, modes.directions]),
            amplitudes=np.concatenate([modes.amplitudes, modes.amplitudes]) / 2,
            rates=np.concatenate(
                [modes.rates - 1j * self.alpha, modes.rates + 1j * self.alpha]
            ),
        )

    def laplace_closed_form(self, mu: float) -> Optional[float]:
        if self._resolved is not None:
            return self._resolved.laplace_closed_form(mu)
        if self.family == PerturbationFamily.oscillation:
            return super().laplace_closed_form(mu)
        modes = self.base.exponential_modes()
        if modes is None or self.dim != 1:
            return None
        # finite support: int_0^alpha e^{-(l+mu) s} ds = (1 - e^{-(l+mu) alpha}) / (l+mu)
        shifted = modes.rates + mu
        if np.any(shifted == 0):
            raise DivergenceError(f"Degenerate transform of {self!r} at mu={mu}")
        weights = modes.directions[:, 0] ** 2
        return float(
            np.sum(
                weights
                * np.real(modes.amplitudes * (1 - np.exp(-shifted * self.alpha)) / shifted)
            )
        )

