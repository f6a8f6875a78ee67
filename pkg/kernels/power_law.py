from typing import Optional

import numpy as np

from kernels.base import BaseKernel
from models.kernel import PerturbationFamily
from utils.errors import DivergenceError


class PowerLawKernel(BaseKernel):
    """Scalar K(t) = c (t + alpha)^-beta."""

    def __init__(self, c: float, alpha: float, beta: float):
        self.c = float(c)
        self.alpha = float(alpha)
        self.beta = float(beta)

    def __repr__(self) -> str:
        return f"PowerLawKernel(c={self.c}, alpha={self.alpha}, beta={self.beta})"

    def lags(self, taus: np.ndarray) -> np.ndarray:
        taus = np.asarray(taus, dtype=np.float64)
        return (self.c * (taus + self.alpha) ** (-self.beta))[:, None, None]

    def integral(self) -> float:
        return self.c * self.alpha ** (1.0 - self.beta) / (self.beta - 1.0)

    def laplace_closed_form(self, mu: float) -> Optional[float]:
        if mu < 0:
            raise DivergenceError(
                f"Laplace transform of {self!r} diverges for mu={mu} < 0"
            )
        if mu == 0:
            return self.integral()
        return None

    def perturb(self, family, alpha: float) -> Optional[BaseKernel]:
        if family == PerturbationFamily.translation:
            return PowerLawKernel(self.c, self.alpha + alpha, self.beta)
        if family == PerturbationFamily.dilation:
            return PowerLawKernel(self.c, self.alpha, self.beta + alpha)
        return None
