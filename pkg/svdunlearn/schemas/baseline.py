from typing import Literal, Optional

from pydantic import BaseModel, Field

BaselineMethod = Literal["retrain", "neggrad", "neggrad_plus"]


class BaselineConfig(BaseModel):
    """Settings for one reference unlearning method."""
    method: BaselineMethod
    learning_rate: float = Field(default=1e-2, ge=0)
    max_steps: int = Field(default=500, ge=1)
    check_interval: int = Field(default=100, ge=1)
    acc_f_threshold: float = Field(
        default=0.1, gt=0, lt=1, description="Forget accuracy threshold as a fraction"
    )
    clip_threshold: float = Field(default=1.0, gt=0)
    retain_batch_size: int = Field(default=128, ge=1)
    forget_batch_size: int = Field(default=128, ge=1)
    tune_learning_rate: bool = Field(
        default=False, description="Pick the learning rate from the preset grid on the first forget class"
    )
    seed: Optional[int] = None
