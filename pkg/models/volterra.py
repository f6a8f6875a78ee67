from typing import Any, List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from kernels.base import BaseKernel
from models.grid import GridFunction


class IntegroODEProblem(BaseModel):
    """x'(t) = -a x(t) + int_0^t k(t-s) x(s) ds + g(t), x(0) = y0."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    a: float = Field(..., gt=0, description="Linear damping")
    k: Any = Field(..., description="Scalar kernel: a BaseKernel or a GridFunction of lags")
    g: Optional[GridFunction] = Field(default=None, description="Forcing, zero when omitted")
    y0: float = Field(default=1.0, ge=0)
    warnings: List[str] = Field(default_factory=list)

    @model_validator(mode="after")
    def check_signs(self):
        if not isinstance(self.k, (BaseKernel, GridFunction)):
            raise ValueError(f"k must be a kernel or a GridFunction, got {type(self.k)}")
        if isinstance(self.k, BaseKernel) and self.k.dim != 1:
            raise ValueError("k must be scalar")
        if self.g is not None and np.any(self.g.values < 0):
            raise ValueError("forcing g must be nonnegative")
        if isinstance(self.k, GridFunction) and np.any(self.k.values < 0):
            self.warnings.append("k takes negative values; comparison results do not apply")
        elif isinstance(self.k, BaseKernel) and self.k.negative_memory:
            self.warnings.append("k is sign-indefinite; comparison results do not apply")
        return self
