from typing import List, Optional, Tuple

from pydantic import BaseModel, Field, model_validator


class GaussianGridSpec(BaseModel):
    """Isotropic Gaussian blobs, one per class."""
    means: List[Tuple[float, float]] = Field(
        default=[(1.0, 1.0), (-1.0, 1.0), (-1.0, -1.0), (1.0, -1.0)],
        description="Class means; class i is centered at means[i]",
    )
    std: Tuple[float, float] = (0.5, 0.5)
    n_train_per_class: int = Field(default=10000, ge=1)
    n_test_per_class: int = Field(default=1000, ge=1)
    seed: int = 0

    @model_validator(mode="after")
    def check_std(self) -> "GaussianGridSpec":
        if min(self.std) < 0:
            raise ValueError("std must be non-negative")
        return self


class RingSpec(BaseModel):
    """Class means evenly spaced on a circle."""
    num_classes: int = Field(default=8, ge=2)
    radius: float = Field(default=1.0, gt=0)


class DatasetSpec(BaseModel):
    """Either a generator description or CSV files."""
    generator: Optional[GaussianGridSpec] = None
    ring: Optional[RingSpec] = None
    train_csv: Optional[str] = None
    test_csv: Optional[str] = None

    @model_validator(mode="after")
    def check_source(self) -> "DatasetSpec":
        if self.train_csv is None and self.test_csv is not None:
            raise ValueError("test_csv requires train_csv")
        if self.train_csv is not None and self.test_csv is None:
            raise ValueError("train_csv requires test_csv")
        return self


class SampleBudget(BaseModel):
    """How many representation samples to draw for the retain and forget spaces."""
    k_r: int = Field(default=300, ge=1, description="Retain representation samples")
    k_f: int = Field(default=900, ge=1, description="Forget representation samples")
    per_class_r: Optional[int] = Field(
        default=100, ge=1, description="Stratified retain quota per class (overrides k_r)"
    )
    score_per_class: Optional[int] = Field(
        default=None, ge=1, description="Rows per class in the candidate-ranking subsets; None keeps X_f and twice X_r"
    )
    seed: int = 0
