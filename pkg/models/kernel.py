from enum import Enum
from typing import Annotated, List, Literal, Optional, Union

from pydantic import BaseModel, Field, model_validator


class KernelType(str, Enum):
    power_law = "power_law"
    exponential = "exponential"
    matrix_exponential = "matrix_exponential"
    perturbed = "perturbed"


class PerturbationFamily(str, Enum):
    translation = "translation"
    dilation = "dilation"
    cutoff = "cutoff"
    oscillation = "oscillation"


class PowerLawConfig(BaseModel):
    type: Literal[KernelType.power_law] = KernelType.power_law
    c: float = Field(default=1.0, gt=0, description="Amplitude")
    alpha: float = Field(default=1.0, gt=0, description="Time shift, K(t) = c(t+alpha)^-beta")
    beta: float = Field(default=4.0, gt=1, description="Decay exponent")


class ExponentialConfig(BaseModel):
    type: Literal[KernelType.exponential] = KernelType.exponential
    c: float = Field(default=1.0, gt=0, description="Amplitude")
    beta: float = Field(default=1.0, gt=0, description="Decay rate, K(t) = c e^{-beta t}")


class MatrixExponentialConfig(BaseModel):
    type: Literal[KernelType.matrix_exponential] = KernelType.matrix_exponential
    eigvals: List[float] = Field(
        default=[0.5, 1.0, 2.0], description="Positive decay rates, the diagonal of Sigma"
    )
    eigvecs: Optional[List[List[float]]] = Field(
        default=None, description="Orthogonal Q; drawn from `basis_seed` when omitted"
    )
    basis_seed: int = Field(default=0, ge=0, description="Seed for a random orthogonal Q")

    @model_validator(mode="after")
    def eigvals_must_be_positive(self):
        if not self.eigvals or any(v <= 0 for v in self.eigvals):
            raise ValueError(f"eigvals must be nonempty and positive, got {self.eigvals}")
        if self.eigvecs is not None and len(self.eigvecs) != len(self.eigvals):
            raise ValueError("eigvecs must be a square matrix matching eigvals")
        return self


class PerturbedConfig(BaseModel):
    type: Literal[KernelType.perturbed] = KernelType.perturbed
    base: "KernelConfig"
    family: PerturbationFamily
    alpha: float = Field(..., ge=0, description="Perturbation strength")


KernelConfig = Annotated[
    Union[PowerLawConfig, ExponentialConfig, MatrixExponentialConfig, PerturbedConfig],
    Field(discriminator="type"),
]

PerturbedConfig.model_rebuild()


class WeightType(str, Enum):
    power_law = "power_law"
    exponential = "exponential"


class PowerLawWeightConfig(BaseModel):
    type: Literal[WeightType.power_law] = WeightType.power_law
    alpha: float = Field(default=1.0, gt=0)
    beta: float = Field(default=6.0, gt=1, description="Must exceed 1 for integrability")
    scale: float = Field(default=1.0, gt=0)
    mu: float = Field(default=0.0, description="U(mu) index; power-law weights are in U(0)")

    @model_validator(mode="after")
    def mu_must_be_zero(self):
        if self.mu != 0.0:
            raise ValueError(f"power-law weights are subexponential, mu must be 0, got {self.mu}")
        return self


class ExponentialWeightConfig(BaseModel):
    type: Literal[WeightType.exponential] = WeightType.exponential
    rate: float = Field(default=0.9, gt=0)
    scale: float = Field(default=1.0, gt=0)
    mu: float = Field(default=-0.8, le=0)

    @model_validator(mode="after")
    def transform_must_converge(self):
        if not self.mu > -self.rate:
            raise ValueError(f"mu must exceed -rate for a finite transform, got mu={self.mu}")
        return self


WeightConfig = Annotated[
    Union[PowerLawWeightConfig, ExponentialWeightConfig],
    Field(discriminator="type"),
]


class PotentialConfig(BaseModel):
    """U(x) = x.Rx/2 + G(x); R = kappa0 * Id unless `r_matrix` is given."""

    kappa0: float = Field(default=10.0, gt=0)
    r_matrix: Optional[List[List[float]]] = None
    convex_part: Literal["zero", "log_cosh"] = Field(
        default="log_cosh", description="G = 0 or G(x) = L_G sum log cosh(x_i)"
    )
    lipschitz_g: float = Field(default=0.01, ge=0, description="L_G")
    u: float = Field(default=10.0, gt=0, description="Force scaling")
