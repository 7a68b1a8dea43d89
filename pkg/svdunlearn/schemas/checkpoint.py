from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field

from svdunlearn.schemas.layer import ArchitectureSpec
from svdunlearn.schemas.training import TrainConfig


class CheckpointDocument(BaseModel):
    """Versioned JSON checkpoint of a network."""
    format_version: int = Field(..., ge=1)
    architecture: ArchitectureSpec
    parameters: Dict[str, List[Any]] = Field(
        ..., description="Parameter and batchnorm buffer arrays as nested decimal lists"
    )
    train_config: Optional[TrainConfig] = None
    seed: int = 0
    metadata: Dict[str, Any] = Field(default_factory=dict)
