from typing import Optional

from pydantic import BaseModel, Field


class TrainConfig(BaseModel):
    """Optimizer and schedule for SGD training."""
    learning_rate: float = Field(default=0.1, ge=0, description="Step size (0 freezes the parameters)")
    momentum: float = Field(default=0.9, ge=0, lt=1)
    nesterov: bool = True
    weight_decay: float = Field(default=0.0, ge=0)
    epochs: int = Field(default=10, ge=1)
    batch_size: int = Field(default=128, ge=1)
    seed: int = 0
    clip_threshold: Optional[float] = Field(default=None, gt=0)
