from typing import List, Optional, Tuple

import numpy as np

from kernels.base import BaseKernel, ExponentialModes
from utils.errors import DomainError


class KernelSum(BaseKernel):
    """sum_i coef_i K_i; an empty sum is the zero kernel of the given dimension."""

    def __init__(self, terms: List[Tuple[float, BaseKernel]], dim: Optional[int] = None):
        self.terms = [(float(coef), kernel) for coef, kernel in terms]
        dims = {kernel.dim for _, kernel in self.terms}
        if dim is not None:
            dims.add(int(dim))
        if len(dims) > 1:
            raise DomainError(f"Cannot combine kernels of dimensions {sorted(dims)}")
        self.dim = dims.pop() if dims else 1
        self.translation_invariant = all(k.translation_invariant for _, k in self.terms)
        self.negative_memory = any(k.negative_memory for _, k in self.terms)

    def __repr__(self) -> str:
        return "KernelSum(" + ", ".join(f"{c} * {k!r}" for c, k in self.terms) + ")"

    def lags(self, taus: np.ndarray) -> np.ndarray:
        taus = np.asarray(taus, dtype=np.float64)
        out = np.zeros((taus.size, self.dim, self.dim))
        for coef, kernel in self.terms:
            out += coef * kernel.lags(taus)
        return out

    def row(self, t: float, s: np.ndarray) -> np.ndarray:
        s = np.asarray(s, dtype=np.float64)
        out = np.zeros((s.size, self.dim, self.dim))
        for coef, kernel in self.terms:
            out += coef * kernel.row(t, s)
        return out

    def exponential_modes(self) -> Optional[ExponentialModes]:
        parts = []
        for coef, kernel in self.terms:
            modes = kernel.exponential_modes()
            if modes is None:
                return None
            parts.append(modes.scaled(coef))
        if not parts:
            return ExponentialModes(
                directions=np.zeros((0, self.dim)),
                amplitudes=np.zeros(0, dtype=np.complex128),
                rates=np.zeros(0, dtype=np.complex128),
            )
        return ExponentialModes(
            directions=np.concatenate([p.directions for p in parts]),
            amplitudes=np.concatenate([p.amplitudes for p in parts]),
            rates=np.concatenate([p.rates for p in parts]),
        )

    def laplace_closed_form(self, mu: float) -> Optional[float]:
        total = 0.0
        for coef, kernel in self.terms:
            value = kernel.laplace_closed_form(mu)
            if value is None:
                return None
            total += coef * value
        return total


def zero_kernel(dim: int = 1) -> KernelSum:
    return KernelSum([], dim=dim)
