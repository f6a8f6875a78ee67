from typing import Optional

import numpy as np

from kernels.base import BaseKernel, ExponentialModes
from models.kernel import PerturbationFamily


class ExponentialKernel(BaseKernel):
    """Scalar K(t) = c e^{-beta t}."""

    def __init__(self, c: float, beta: float):
        self.c = float(c)
        self.beta = float(beta)

    def __repr__(self) -> str:
        return f"ExponentialKernel(c={self.c}, beta={self.beta})"

    def lags(self, taus: np.ndarray) -> np.ndarray:
        taus = np.asarray(taus, dtype=np.float64)
        return (self.c * np.exp(-self.beta * taus))[:, None, None]

    def exponential_modes(self) -> ExponentialModes:
        return ExponentialModes(
            directions=np.ones((1, 1)),
            amplitudes=np.array([self.c], dtype=np.complex128),
            rates=np.array([self.beta], dtype=np.complex128),
        )

    def perturb(self, family, alpha: float) -> Optional[BaseKernel]:
        # Same conventions as the matrix exponential: translation shifts the rate,
        # dilation shifts time.
        if family == PerturbationFamily.translation:
            return ExponentialKernel(self.c, self.beta + alpha)
        if family == PerturbationFamily.dilation:
            return ExponentialKernel(self.c * np.exp(-self.beta * alpha), self.beta)
        return None
