from typing import Callable

import numpy as np

from kernels.base import BaseKernel
from utils.errors import DomainError


class TwoTimeKernel(BaseKernel):
    """A kernel given by a user-supplied map (t, s) -> d x d matrix."""

    translation_invariant = False

    def __init__(self, evaluator: Callable[[float, float], np.ndarray], dim: int):
        self.evaluator = evaluator
        self.dim = int(dim)

    def __repr__(self) -> str:
        return f"TwoTimeKernel(dim={self.dim})"

    def lags(self, taus: np.ndarray) -> np.ndarray:
        raise DomainError("A two-time kernel has no lag representation")

    def row(self, t: float, s: np.ndarray) -> np.ndarray:
        out = np.empty((len(s), self.dim, self.dim))
        for j, s_j in enumerate(s):
            out[j] = np.asarray(self.evaluator(float(t), float(s_j)), dtype=np.float64).reshape(
                self.dim, self.dim
            )
        return out
