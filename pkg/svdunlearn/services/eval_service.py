"""
Eval Service

Accuracy on the retain/forget test partitions, confusion matrices, per-class
accuracy, metrics records and the redistribution analysis of forgotten-class
predictions.
"""
from typing import Any, Dict, Iterable, List, Optional, Tuple

import numpy as np

from svdunlearn.core.exceptions import ShapeMismatchException, ValidationException
from svdunlearn.core.logging_config import get_logger
from svdunlearn.models.dataset import Dataset
from svdunlearn.models.network import Network
from svdunlearn.schemas.metrics import MetricsRecord, RedistributionEntry, RedistributionReport
from svdunlearn.services.data_service import DataService
from svdunlearn.services.mia_service import ConfidenceMode, MiaService
from svdunlearn.services.unlearn_service import UnlearnService

logger = get_logger("eval")


class EvalService:
    """Service for model evaluation."""

    @staticmethod
    def confusion_matrix(labels: np.ndarray, predictions: np.ndarray, num_classes: int) -> np.ndarray:
        """Counts with true classes as rows and predicted classes as columns."""
        labels = np.asarray(labels, dtype=np.int64)
        predictions = np.asarray(predictions, dtype=np.int64)
        if labels.shape != predictions.shape:
            raise ShapeMismatchException("confusion_matrix", labels.shape, predictions.shape)
        flat = np.bincount(labels * num_classes + predictions, minlength=num_classes * num_classes)
        return flat.reshape(num_classes, num_classes)

    @staticmethod
    def per_class_accuracy(confusion: np.ndarray) -> List[Optional[float]]:
        totals = confusion.sum(axis=1)
        return [100.0 * float(confusion[c, c]) / float(totals[c]) if totals[c] else None
                for c in range(confusion.shape[0])]

    @staticmethod
    def evaluate(
            model: Network,
            test_retain: Dataset,
            test_forget: Dataset,
    ) -> Tuple[float, float, np.ndarray]:
        """
        Returns:
            (acc_r, acc_f, confusion) with the confusion matrix over all classes
        """
        if len(test_retain) == 0 or len(test_forget) == 0:
            raise ValidationException("Evaluation needs non-empty retain and forget test sets")
        if test_retain.feature_dim != model.input_width or test_forget.feature_dim != model.input_width:
            raise ShapeMismatchException("evaluate", f"(N, {model.input_width})", test_retain.inputs.shape)
        num_classes = max(model.num_classes, test_retain.num_classes)
        retain_pred = model.predict(test_retain.inputs)
        forget_pred = model.predict(test_forget.inputs)
        acc_r = 100.0 * float(np.mean(retain_pred == test_retain.labels))
        acc_f = 100.0 * float(np.mean(forget_pred == test_forget.labels))
        confusion = EvalService.confusion_matrix(
            np.concatenate([test_retain.labels, test_forget.labels]),
            np.concatenate([retain_pred, forget_pred]),
            num_classes,
        )
        return acc_r, acc_f, confusion

    @staticmethod
    def build_metrics(
            method: str,
            model: Network,
            train: Dataset,
            test: Dataset,
            forget_classes: Iterable[int],
            config: Optional[Dict[str, Any]] = None,
            with_mia: bool = True,
            mia_mode: ConfidenceMode = "label",
            seed: int = 0,
    ) -> MetricsRecord:
        """Full metrics record of one model for one forget request."""
        forget = sorted(set(int(c) for c in forget_classes))
        test_retain, test_forget = DataService.split_by_class(test, forget)
        acc_r, acc_f, confusion = EvalService.evaluate(model, test_retain, test_forget)

        mia, degenerate = None, False
        if with_mia:
            train_retain, train_forget = DataService.split_by_class(train, forget)
            mia, classifier = MiaService.mia_attack(
                model, train_retain, test_retain, train_forget, forget, seed=seed, mode=mia_mode
            )
            degenerate = classifier.degenerate

        record = MetricsRecord(
            method=method,
            forget_classes=forget,
            acc_r=acc_r,
            acc_f=acc_f,
            mia=mia,
            mia_degenerate=degenerate,
            score=UnlearnService.score(acc_r, acc_f),
            confusion=confusion.tolist(),
            per_class_accuracy=EvalService.per_class_accuracy(confusion),
            config=config or {},
        )
        logger.info(
            f"{method} | forget {forget} | acc_r {acc_r:.2f} | acc_f {acc_f:.2f} | "
            f"mia {'-' if mia is None else f'{mia:.2f}'} | score {record.score:.2f}"
        )
        return record

    @staticmethod
    def redistribution_report(
            confusion_before: np.ndarray,
            confusion_after: np.ndarray,
            forget_class: int,
    ) -> RedistributionReport:
        """
        Ranked predicted-class mass of the forget class's test samples after
        unlearning, plus the class it was most confused with before.
        """
        before = np.asarray(confusion_before)
        after = np.asarray(confusion_after)
        if before.shape != after.shape or before.ndim != 2 or before.shape[0] != before.shape[1]:
            raise ShapeMismatchException("redistribution_report", before.shape, after.shape)
        if not 0 <= forget_class < after.shape[0]:
            raise ValidationException(f"Forget class {forget_class} outside the confusion matrix")

        row = after[forget_class]
        total = int(row.sum())
        order = sorted(range(row.size), key=lambda c: (-int(row[c]), c))
        absorbed = [
            RedistributionEntry(predicted_class=c, count=int(row[c]), share=float(row[c]) / total if total else 0.0)
            for c in order if row[c] > 0
        ]

        off_diagonal = before[forget_class].astype(np.int64).copy()
        off_diagonal[forget_class] = 0
        undefined = int(off_diagonal.sum()) == 0
        most_confused = None if undefined else int(np.argmax(off_diagonal))
        return RedistributionReport(
            forget_class=forget_class,
            total=total,
            absorbed=absorbed,
            most_confused_before=most_confused,
            undefined_before=undefined,
        )
