"""
MIA Service

Simple membership-inference attack: a 1-D soft-margin linear separator over
model confidences, fitted on training-retain (member) versus test-retain
(nonmember) samples and applied to the training-forget samples.

Confidence features ("label", "max") are oriented: a higher confidence can
only ever point towards member. When the separator does no better than
chance on its own training data the fitted threshold carries no signal, and
the attack calls a sample nonmember only when the model is less confident on
it than on all but the lowest MEMBER_QUANTILE of the members.
"""
from typing import Iterable, Literal, Optional, Tuple

import numpy as np

from svdunlearn.core.exceptions import ValidationException
from svdunlearn.core.logging_config import get_logger
from svdunlearn.models.dataset import Dataset
from svdunlearn.models.functional import softmax
from svdunlearn.models.network import Network
from svdunlearn.schemas.metrics import MiaClassifier

logger = get_logger("mia")

ConfidenceMode = Literal["label", "target", "max"]
ORIENTED_MODES = ("label", "max")

REGULARIZATION = 1e-3
EPOCHS = 1000
STEP_SIZE = 0.1
CHANCE_MARGIN = 0.1
MEMBER_QUANTILE = 0.05


class MiaService:
    """Service for the confidence-score membership-inference attack."""

    @staticmethod
    def confidences(
            model: Network,
            data: Dataset,
            target_classes: Iterable[int],
            mode: ConfidenceMode = "label",
            batch_size: int = 4096,
    ) -> np.ndarray:
        """
        One confidence per sample.

        "label": probability of the sample's own label; "target": softmax mass
        on the target classes; "max": top-class probability.
        """
        targets = sorted(set(int(c) for c in target_classes))
        scores = []
        for start in range(0, len(data), batch_size):
            probs = softmax(model.forward(data.inputs[start:start + batch_size]).logits)
            if mode == "label":
                labels = data.labels[start:start + batch_size]
                scores.append(probs[np.arange(labels.size), labels])
            elif mode == "max":
                scores.append(probs.max(axis=1))
            else:
                scores.append(probs[:, targets].sum(axis=1))
        return np.concatenate(scores) if scores else np.zeros(0)

    @staticmethod
    def balance(
            members: np.ndarray,
            nonmembers: np.ndarray,
            rng: np.random.Generator,
    ) -> Tuple[np.ndarray, np.ndarray]:
        """Subsample the larger side to the size of the smaller one."""
        size = min(members.size, nonmembers.size)
        if members.size > size:
            members = members[np.sort(rng.choice(members.size, size=size, replace=False))]
        if nonmembers.size > size:
            nonmembers = nonmembers[np.sort(rng.choice(nonmembers.size, size=size, replace=False))]
        return members, nonmembers

    @staticmethod
    def fit_separator(
            features: np.ndarray,
            labels: np.ndarray,
            regularization: float = REGULARIZATION,
            epochs: int = EPOCHS,
            seed: int = 0,
            oriented: bool = False,
    ) -> MiaClassifier:
        """
        Hinge-loss SVM on one scalar feature, labels +1 (member) / -1 (nonmember).

        Full-batch subgradient descent on the standardized feature with step
        0.1 / sqrt(t); the iterate with the lowest objective is kept. With
        `oriented` the weight is clipped at zero after every step.
        """
        features = np.asarray(features, dtype=np.float64)
        labels = np.asarray(labels, dtype=np.float64)
        if features.size == 0 or features.shape != labels.shape:
            raise ValidationException("Separator needs one label per non-empty feature")

        mean = float(features.mean())
        scale = float(features.std())
        if scale == 0.0:
            # no spread: predict the majority side everywhere
            majority = 1.0 if np.sum(labels > 0) >= np.sum(labels < 0) else -1.0
            return MiaClassifier(weight=0.0, bias=majority, mean=mean, scale=1.0,
                                 regularization=regularization, seed=seed, objective=1.0,
                                 train_accuracy=float(np.mean(labels == majority)), degenerate=True)
        z = (features - mean) / scale

        def objective(w: float, b: float) -> float:
            hinge = np.maximum(0.0, 1.0 - labels * (w * z + b))
            return 0.5 * regularization * w * w + float(hinge.mean())

        w, b = 0.0, 0.0
        best = (w, b, objective(w, b))
        for t in range(1, epochs + 1):
            active = labels * (w * z + b) < 1.0
            grad_w = regularization * w - float(np.sum(labels[active] * z[active])) / z.size
            grad_b = -float(np.sum(labels[active])) / z.size
            step = STEP_SIZE / np.sqrt(t)
            w -= step * grad_w
            b -= step * grad_b
            if oriented:
                w = max(w, 0.0)
            value = objective(w, b)
            if value < best[2]:
                best = (w, b, value)
        predicted = np.where(best[0] * z + best[1] >= 0.0, 1.0, -1.0)
        return MiaClassifier(weight=best[0], bias=best[1], mean=mean, scale=scale,
                             regularization=regularization, seed=seed, objective=best[2],
                             train_accuracy=float(np.mean(predicted == labels)))

    @staticmethod
    def member_threshold(
            members: np.ndarray,
            separator: MiaClassifier,
            quantile: float = MEMBER_QUANTILE,
    ) -> MiaClassifier:
        """Member side = confidence at or above the `quantile` of the member confidences."""
        threshold = float(np.quantile(np.asarray(members, dtype=np.float64), quantile))
        return separator.model_copy(update={
            "weight": 1.0, "bias": 0.0, "mean": threshold, "scale": 1.0, "calibrated": True,
        })

    @staticmethod
    def predict_member(classifier: MiaClassifier, features: np.ndarray) -> np.ndarray:
        return classifier.decision(np.asarray(features, dtype=np.float64)) >= 0.0

    @staticmethod
    def mia_attack(
            model: Network,
            train_retain: Dataset,
            test_retain: Dataset,
            train_forget: Dataset,
            target_classes: Iterable[int],
            seed: int = 0,
            mode: ConfidenceMode = "label",
            chance_margin: Optional[float] = CHANCE_MARGIN,
    ) -> Tuple[float, MiaClassifier]:
        """
        Percentage of training-forget samples the attack labels nonmember.

        `chance_margin=None` keeps the fitted separator even when it does not
        beat chance.
        """
        if len(train_retain) == 0 or len(test_retain) == 0 or len(train_forget) == 0:
            raise ValidationException("MIA needs non-empty train retain, test retain and train forget data")
        targets = list(target_classes)
        rng = np.random.default_rng(seed)
        oriented = mode in ORIENTED_MODES
        members, nonmembers = MiaService.balance(
            MiaService.confidences(model, train_retain, targets, mode),
            MiaService.confidences(model, test_retain, targets, mode),
            rng,
        )
        features = np.concatenate([members, nonmembers])
        labels = np.concatenate([np.ones(members.size), -np.ones(nonmembers.size)])
        classifier = MiaService.fit_separator(features, labels, seed=seed, oriented=oriented)
        if classifier.degenerate:
            logger.warning("MIA confidence feature has no spread; attack predicts one side only")
        elif oriented and chance_margin is not None and classifier.train_accuracy < 0.5 + chance_margin:
            logger.debug(
                f"MIA separator at chance ({100.0 * classifier.train_accuracy:.1f}% on its training data); "
                f"thresholding at the {MEMBER_QUANTILE:g} member quantile"
            )
            classifier = MiaService.member_threshold(members, classifier)

        forget_scores = MiaService.confidences(model, train_forget, targets, mode)
        nonmember_share = 100.0 * float(np.mean(~MiaService.predict_member(classifier, forget_scores)))
        logger.info(f"MIA: {nonmember_share:.2f}% of forget samples classified nonmember")
        return nonmember_share, classifier
