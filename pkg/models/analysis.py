from enum import Enum
from typing import List, Optional, Tuple

from pydantic import BaseModel, Field

from models.grid import GridFunction


class SchurNorm(BaseModel):
    value: float = Field(..., ge=0)
    argmax_time: Optional[float] = Field(
        default=None, description="Grid time where the sup binds; None for the t -> inf limit"
    )
    tail: float = Field(default=0.0, description="Analytic remainder beyond the horizon (squared)")
    negative_memory: bool = False
    divergent: bool = False
    warnings: List[str] = Field(default_factory=list)

    @property
    def squared(self) -> float:
        return self.value**2


class SubexponentialReport(BaseModel):
    ratio_near_zero: float
    ratio_at_horizon: float
    limit_target: Optional[float] = Field(
        default=None, description="2 h^(mu); None when the transform diverges"
    )
    shift_error: float
    small_time_ok: bool
    convolution_ratio_ok: bool
    shift_ok: bool
    divergent: bool
    tolerance: float = 0.05

    @property
    def passed(self) -> bool:
        return self.small_time_ok and self.convolution_ratio_ok and self.shift_ok


class ConditionTag(str, Enum):
    first_order_moment = "FirstOrderMoment"
    first_order_error = "FirstOrderError"
    second_order_moment = "SecondOrderMoment"
    second_order_error = "SecondOrderError"
    second_order_friction = "SecondOrderFriction"
    comparison = "Comparison"


class ConditionCheck(BaseModel):
    tag: ConditionTag
    holds: bool
    lhs: Optional[float] = None
    rhs: Optional[float] = None
    checkable: bool = True
    warnings: List[str] = Field(default_factory=list)


class ComparisonReport(BaseModel):
    condition: ConditionCheck
    empirical_constant: Optional[float] = Field(
        default=None, description="sup x / (y0 k + k*g) over the window"
    )
    argmax_time: Optional[float] = None
    window: Tuple[float, float]
    dominance_holds: bool
    max_dominance_gap: float = Field(
        ..., description="max (y - x) over the grid, <= 0 when the sub-solution is dominated"
    )
    asymptotic_ratio_observed: Optional[float] = None
    asymptotic_ratio_predicted: Optional[float] = Field(
        default=None, description="1 / (a - int k)^2 for g = 0 and integrable k"
    )
    status: str = "ok"


class DecayModel(str, Enum):
    power_law = "PowerLaw"
    exponential = "Exponential"


class DecayFit(BaseModel):
    model: DecayModel
    rate: float
    intercept: float
    window: Tuple[float, float]
    r_squared: float = Field(..., ge=0, le=1)
    shift: float = 0.0
    dropped_points: int = 0


class BoundConstant(BaseModel):
    value: float = Field(..., ge=0)
    offset: float = Field(..., ge=0, description="Tr(sigma sigma^T) floor")
    window: Tuple[float, float]
    argmax_time: Optional[float] = None
    weight: str = Field(..., description="repr of the weight function used")


class LinearityReport(BaseModel):
    slope: float
    intercept: float
    pearson_r: float
    n_points: int


class MomentFunctional(str, Enum):
    diff_sq = "DiffSq"
    lyapunov_sq = "LyapunovSq"
    norm_sq = "NormSq"


class MomentSeries(BaseModel):
    functional: MomentFunctional
    mean: GridFunction
    stderr: GridFunction
    batches: int


class WassersteinBound(BaseModel):
    """Synchronized-coupling upper bound of the squared 2-Wasserstein distance."""

    at_horizon: float = Field(..., ge=0)
    supremum: float = Field(..., ge=0)
    argmax_time: float
