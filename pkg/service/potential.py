from typing import List, Optional

import numpy as np
from pydantic import BaseModel, Field

from models.kernel import PotentialConfig
from utils.errors import DomainError
from utils.logger import logger

KAPPA_TOLERANCE = 1e-10
CONVEXITY_TOLERANCE = 1e-12


class Potential:
    """
    U(x) = x.Rx/2 + G(x) with R symmetric positive definite and G convex with an
    L_G-Lipschitz gradient. The built-in G is L_G sum_i log cosh(x_i), or zero.
    """

    def __init__(
        self,
        R: np.ndarray,
        lipschitz_g: float = 0.0,
        u: float = 1.0,
        convex_part: str = "zero",
        kappa0: Optional[float] = None,
    ):
        R = np.atleast_2d(np.asarray(R, dtype=np.float64))
        if R.shape[0] != R.shape[1] or not np.allclose(R, R.T):
            raise DomainError("R must be a symmetric square matrix")
        eigenvalues = np.linalg.eigvalsh(R)
        if eigenvalues[0] <= 0:
            raise DomainError(f"R must be positive definite, smallest eigenvalue {eigenvalues[0]}")
        if convex_part not in ("zero", "log_cosh"):
            raise DomainError(f"Unknown convex part {convex_part}")
        self.R = R
        self.kappa0 = float(eigenvalues[0]) if kappa0 is None else float(kappa0)
        self.lipschitz_g = float(lipschitz_g) if convex_part == "log_cosh" else 0.0
        self.u = float(u)
        self.convex_part = convex_part

    @classmethod
    def from_config(cls, config: PotentialConfig, dim: int) -> "Potential":
        R = config.kappa0 * np.eye(dim) if config.r_matrix is None else np.array(config.r_matrix)
        return cls(R, config.lipschitz_g, config.u, config.convex_part)

    def __repr__(self) -> str:
        return (
            f"Potential(kappa0={self.kappa0}, L_G={self.lipschitz_g}, u={self.u}, "
            f"G={self.convex_part})"
        )

    @property
    def dim(self) -> int:
        return self.R.shape[0]

    @property
    def minimum(self) -> np.ndarray:
        return np.zeros(self.dim)

    def grad_g(self, x: np.ndarray) -> np.ndarray:
        if self.convex_part == "zero":
            return np.zeros_like(x)
        return self.lipschitz_g * np.tanh(x)

    def gradient(self, x: np.ndarray) -> np.ndarray:
        """grad U = R x + grad G(x); accepts a single point or a stack of points."""
        return x @ self.R.T + self.grad_g(x)

    def value(self, x: np.ndarray) -> np.ndarray:
        quadratic = 0.5 * np.einsum("...i,ij,...j->...", x, self.R, x)
        if self.convex_part == "zero":
            return quadratic
        return quadratic + self.lipschitz_g * np.sum(np.logaddexp(x, -x) - np.log(2), axis=-1)


class PotentialReport(BaseModel):
    kappa_error: float = Field(..., ge=0)
    max_lipschitz_ratio: float
    min_monotonicity: float
    passed: bool
    violations: List[str] = Field(default_factory=list)


def check_potential(pot: Potential, n_pairs: int = 1000, seed: int = 0) -> PotentialReport:
    """kappa0 = lambda_min(R), Lipschitz grad G and convexity of G on random pairs."""
    rng = np.random.default_rng(seed)
    x = rng.normal(scale=3.0, size=(n_pairs, pot.dim))
    y = rng.normal(scale=3.0, size=(n_pairs, pot.dim))
    dg = pot.grad_g(x) - pot.grad_g(y)
    dx = x - y

    violations = []
    kappa_error = abs(pot.kappa0 - float(np.linalg.eigvalsh(pot.R)[0]))
    if kappa_error > KAPPA_TOLERANCE:
        violations.append(f"kappa0 differs from lambda_min(R) by {kappa_error:.3g}")

    ratios = np.linalg.norm(dg, axis=1) / np.linalg.norm(dx, axis=1)
    max_ratio = float(np.max(ratios))
    if max_ratio > pot.lipschitz_g * (1 + 1e-12) + CONVEXITY_TOLERANCE:
        violations.append(f"grad G ratio {max_ratio:.6g} exceeds L_G={pot.lipschitz_g}")

    monotonicity = float(np.min(np.sum(dg * dx, axis=1)))
    if monotonicity < -CONVEXITY_TOLERANCE:
        violations.append(f"G is not convex: <grad G(x) - grad G(y), x - y> = {monotonicity}")

    for violation in violations:
        logger.warning(f"{pot!r}: {violation}")
    return PotentialReport(
        kappa_error=kappa_error,
        max_lipschitz_ratio=max_ratio,
        min_monotonicity=monotonicity,
        passed=not violations,
        violations=violations,
    )
