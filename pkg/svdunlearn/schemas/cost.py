from typing import Literal

from pydantic import BaseModel, Field

CostMethod = Literal["retrain", "ours"]


class CostParams(BaseModel):
    """Sizes entering the analytical flop counts of one linear layer."""
    f_in: int = Field(default=768, ge=0, description="Input feature dimension")
    f_out: int = Field(default=768, ge=0, description="Output feature dimension")
    n_r: int = Field(default=1_280_000, ge=0, description="Training samples seen by one retraining epoch")
    n_our_r: int = Field(default=999, ge=0, description="Retain representation samples")
    n_our_f: int = Field(default=500, ge=0, description="Forget representation samples")


class CostRow(BaseModel):
    hidden_size: int
    n_samples: int
    method: CostMethod
    flops: int
    percent_of_retrain_epoch: float
