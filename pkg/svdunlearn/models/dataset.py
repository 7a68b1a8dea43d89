from dataclasses import dataclass
from typing import Literal

import numpy as np

from svdunlearn.core.exceptions import NonFiniteValueException, ShapeMismatchException, ValidationException

SplitTag = Literal["train", "test"]


@dataclass(frozen=True)
class Dataset:
    """Labelled feature matrix."""
    inputs: np.ndarray
    labels: np.ndarray
    num_classes: int
    split: SplitTag = "train"

    def __post_init__(self):
        inputs = np.asarray(self.inputs, dtype=np.float64)
        labels = np.asarray(self.labels, dtype=np.int64)
        if inputs.ndim != 2:
            raise ShapeMismatchException("Dataset", "N x d inputs", inputs.shape)
        if labels.shape != (inputs.shape[0],):
            raise ShapeMismatchException("Dataset", (inputs.shape[0],), labels.shape)
        if not np.all(np.isfinite(inputs)):
            raise NonFiniteValueException("Dataset")
        if labels.size and (labels.min() < 0 or labels.max() >= self.num_classes):
            raise ValidationException(f"Dataset labels must lie in [0, {self.num_classes})")
        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return self.inputs.shape[0]

    @property
    def feature_dim(self) -> int:
        return self.inputs.shape[1]

    def subset(self, mask_or_index) -> "Dataset":
        return Dataset(self.inputs[mask_or_index], self.labels[mask_or_index], self.num_classes, self.split)

    def classes_present(self) -> np.ndarray:
        return np.unique(self.labels)

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.num_classes)
