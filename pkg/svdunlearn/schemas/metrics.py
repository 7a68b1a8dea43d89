from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field


class MetricsRecord(BaseModel):
    """Evaluation of one model against the retain/forget test partitions."""
    method: str
    forget_classes: List[int]
    acc_r: float = Field(..., ge=0, le=100)
    acc_f: float = Field(..., ge=0, le=100)
    mia: Optional[float] = Field(None, ge=0, le=100, description="% of train-forget samples classified nonmember")
    mia_degenerate: bool = False
    score: float
    confusion: List[List[int]]
    per_class_accuracy: List[Optional[float]] = Field(
        default_factory=list, description="Test accuracy per class; None for classes without test samples"
    )
    accuracy: Optional[float] = Field(None, ge=0, le=100, description="Accuracy on the full test split")
    extra: Dict[str, Any] = Field(default_factory=dict, description="Method-specific bookkeeping")
    config: Dict[str, Any] = Field(default_factory=dict)


class MiaClassifier(BaseModel):
    """1-D soft-margin separator over standardized confidence scores."""
    weight: float
    bias: float
    mean: float
    scale: float
    regularization: float
    seed: int
    objective: float
    train_accuracy: float = Field(0.0, ge=0, le=1, description="Share of the fitting samples the separator gets right")
    degenerate: bool = False
    calibrated: bool = Field(False, description="Threshold set from the member confidences after a chance-level fit")

    def decision(self, confidence):
        """Signed distance; non-negative means member."""
        return self.weight * (confidence - self.mean) / self.scale + self.bias


class RedistributionEntry(BaseModel):
    predicted_class: int
    count: int
    share: float


class RedistributionReport(BaseModel):
    """Where the forgotten class's test samples go after unlearning."""
    forget_class: int
    total: int
    absorbed: List[RedistributionEntry]
    most_confused_before: Optional[int] = Field(
        None, description="Class most often predicted for the forget class before unlearning"
    )
    undefined_before: bool = Field(
        False, description="No off-diagonal confusion existed before unlearning"
    )
