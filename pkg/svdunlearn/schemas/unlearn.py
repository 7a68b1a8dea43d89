from typing import List, Literal, Optional

from pydantic import BaseModel, Field, field_validator

from svdunlearn.schemas.data import SampleBudget

Variant = Literal["input_suppression", "output_suppression", "both"]


class ScalingCoefficients(BaseModel):
    """One (alpha_r, alpha_f) candidate."""
    alpha_r: float = Field(..., gt=0)
    alpha_f: float = Field(..., gt=0)


class UnlearnConfig(BaseModel):
    """Grid search and projection settings."""
    alpha_r_list: List[float] = Field(default=[10.0, 30.0, 100.0, 300.0, 1000.0], min_length=1)
    alpha_f_list: List[float] = Field(default=[3.0], min_length=1)
    budget: SampleBudget = Field(default_factory=SampleBudget)
    variant: Variant = "input_suppression"
    start_layer: int = Field(
        default=0, ge=0, description="Number of leading linear/conv layers left untouched"
    )
    inner_loop_stop_fraction: float = Field(
        default=0.5, ge=0, le=1, description="Stop the alpha_f loop below this share of the original acc_r; 0 disables"
    )
    svd_route: Literal["gram", "direct"] = "gram"
    exclude_retain_classes: List[int] = Field(default_factory=list)
    representation_batch_size: int = Field(default=512, ge=1)

    @field_validator("alpha_r_list", "alpha_f_list")
    @classmethod
    def check_positive(cls, values: List[float]) -> List[float]:
        if any(v <= 0 for v in values):
            raise ValueError("scaling coefficients must be positive")
        return values


class SearchTraceRow(BaseModel):
    """One evaluated grid-search candidate."""
    alpha_r: float
    alpha_f: float
    acc_r: float
    acc_f: float
    score: float
    selected: bool = False
