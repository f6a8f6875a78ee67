import numpy as np

from kernels.base import BaseKernel, ExponentialModes
from kernels.combination import KernelSum, zero_kernel
from kernels.exponential import ExponentialKernel
from kernels.matrix_exponential import MatrixExponentialKernel
from kernels.perturbed import PerturbedKernel
from kernels.power_law import PowerLawKernel
from kernels.two_time import TwoTimeKernel
from kernels.weight import BaseWeight, ExponentialWeight, PowerLawWeight, TabulatedWeight
from models.kernel import (
    ExponentialConfig,
    ExponentialWeightConfig,
    KernelConfig,
    MatrixExponentialConfig,
    PerturbedConfig,
    PowerLawConfig,
    PowerLawWeightConfig,
    WeightConfig,
)
from utils.linalg import random_orthogonal

__all__ = [
    "BaseKernel",
    "BaseWeight",
    "ExponentialKernel",
    "ExponentialModes",
    "ExponentialWeight",
    "KernelSum",
    "MatrixExponentialKernel",
    "PerturbedKernel",
    "PowerLawKernel",
    "PowerLawWeight",
    "TabulatedWeight",
    "TwoTimeKernel",
    "get_kernel",
    "get_weight",
    "zero_kernel",
]


def get_kernel(config: KernelConfig) -> BaseKernel:
    if isinstance(config, PowerLawConfig):
        return PowerLawKernel(c=config.c, alpha=config.alpha, beta=config.beta)
    if isinstance(config, ExponentialConfig):
        return ExponentialKernel(c=config.c, beta=config.beta)
    if isinstance(config, MatrixExponentialConfig):
        eigvecs = (
            np.array(config.eigvecs)
            if config.eigvecs is not None
            else random_orthogonal(len(config.eigvals), config.basis_seed)
        )
        return MatrixExponentialKernel(eigvecs=eigvecs, eigvals=np.array(config.eigvals))
    if isinstance(config, PerturbedConfig):
        return PerturbedKernel(get_kernel(config.base), config.family, config.alpha)
    raise ValueError(f"Unsupported kernel type: {config!r}")


def get_weight(config: WeightConfig) -> BaseWeight:
    if isinstance(config, PowerLawWeightConfig):
        return PowerLawWeight(alpha=config.alpha, beta=config.beta, scale=config.scale)
    if isinstance(config, ExponentialWeightConfig):
        return ExponentialWeight(rate=config.rate, mu=config.mu, scale=config.scale)
    raise ValueError(f"Unsupported weight type: {config!r}")
