from typing import Optional

import numpy as np

from kernels.base import BaseKernel, ExponentialModes
from models.kernel import PerturbationFamily
from utils.errors import DomainError


class MatrixExponentialKernel(BaseKernel):
    """
    K(t) = Q e^{-Sigma t} Q^T, symmetric positive definite for every t.

    `amplitudes` scales each eigendirection and stays 1 unless the kernel was
    obtained from a time shift of another one.
    """

    def __init__(
        self,
        eigvecs: np.ndarray,
        eigvals: np.ndarray,
        amplitudes: Optional[np.ndarray] = None,
    ):
        self.eigvecs = np.array(eigvecs, dtype=np.float64)
        self.eigvals = np.array(eigvals, dtype=np.float64)
        self.dim = self.eigvals.size
        if self.eigvecs.shape != (self.dim, self.dim):
            raise DomainError(f"eigvecs must be {self.dim}x{self.dim}, got {self.eigvecs.shape}")
        if np.any(self.eigvals <= 0):
            raise DomainError(f"eigvals must be positive, got {self.eigvals}")
        if not np.allclose(self.eigvecs.T @ self.eigvecs, np.eye(self.dim), atol=1e-10):
            raise DomainError("eigvecs must be orthogonal")
        self.amplitudes = (
            np.ones(self.dim) if amplitudes is None else np.array(amplitudes, dtype=np.float64)
        )

    def __repr__(self) -> str:
        return f"MatrixExponentialKernel(eigvals={self.eigvals.tolist()})"

    @property
    def lambda_min(self) -> float:
        return float(self.eigvals.min())

    def lags(self, taus: np.ndarray) -> np.ndarray:
        taus = np.asarray(taus, dtype=np.float64)
        diag = self.amplitudes[None, :] * np.exp(-np.outer(taus, self.eigvals))
        mats = np.einsum("ik,nk,jk->nij", self.eigvecs, diag, self.eigvecs)
        return 0.5 * (mats + np.swapaxes(mats, 1, 2))

    def exponential_modes(self) -> ExponentialModes:
        return ExponentialModes(
            directions=self.eigvecs.T.copy(),
            amplitudes=self.amplitudes.astype(np.complex128),
            rates=self.eigvals.astype(np.complex128),
        )

    def perturb(self, family, alpha: float) -> Optional[BaseKernel]:
        if family == PerturbationFamily.translation:
            return MatrixExponentialKernel(self.eigvecs, self.eigvals + alpha, self.amplitudes)
        if family == PerturbationFamily.dilation:
            return MatrixExponentialKernel(
                self.eigvecs, self.eigvals, self.amplitudes * np.exp(-self.eigvals * alpha)
            )
        return None
