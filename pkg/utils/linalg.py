import numpy as np
from scipy.stats import ortho_group


def operator_norm(matrices: np.ndarray) -> np.ndarray:
    """
    Largest singular value of each matrix in a stack.

    Accepts a single (d, d) matrix or a (..., d, d) stack and returns a scalar
    or an array of shape (...).
    """
    matrices = np.asarray(matrices, dtype=np.float64)
    if matrices.shape[-2:] == (1, 1):
        return np.abs(matrices[..., 0, 0])
    return np.linalg.norm(matrices, ord=2, axis=(-2, -1))


def random_orthogonal(dim: int, seed: int) -> np.ndarray:
    if dim == 1:
        return np.ones((1, 1))
    return ortho_group.rvs(dim, random_state=np.random.default_rng(seed))
