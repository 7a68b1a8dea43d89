"""
Baseline Service

Reference unlearning methods: retraining from scratch, gradient ascent on the
forget subset (NegGrad) and ascent interleaved with retain descent (NegGrad+).
"""
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from svdunlearn.core.exceptions import ValidationException
from svdunlearn.core.logging_config import get_logger
from svdunlearn.core.presets import BASELINE_LEARNING_RATES
from svdunlearn.models.dataset import Dataset
from svdunlearn.models.network import Network
from svdunlearn.models.optimizer import SGD
from svdunlearn.schemas.baseline import BaselineConfig
from svdunlearn.schemas.layer import ArchitectureSpec
from svdunlearn.schemas.training import TrainConfig
from svdunlearn.services.training_service import Gradients, TrainingService
from svdunlearn.services.unlearn_service import UnlearnService

logger = get_logger("baselines")


@dataclass
class BaselineResult:
    model: Network
    method: str
    learning_rate: float
    steps: int
    acc_f_checks: List[Tuple[int, float]] = field(default_factory=list)


def _batch_stream(data: Dataset, batch_size: int, rng: np.random.Generator) -> Iterator[np.ndarray]:
    """Endless shuffled mini-batch indices, reshuffled after every pass."""
    while True:
        order = rng.permutation(len(data))
        for start in range(0, len(data), batch_size):
            yield order[start:start + batch_size]


class BaselineService:
    """Service for reference unlearning methods."""

    @staticmethod
    def retrain(architecture: ArchitectureSpec, retain: Dataset, cfg: TrainConfig) -> BaselineResult:
        """Fresh model trained on retain data only, with the original recipe."""
        if len(retain) == 0:
            raise ValidationException("Retraining needs retain data")
        logger.info(f"Retraining from scratch on {len(retain)} retain samples")
        model = TrainingService.fit_new(architecture, retain, cfg)
        steps = cfg.epochs * int(np.ceil(len(retain) / cfg.batch_size))
        return BaselineResult(model=model, method="retrain", learning_rate=cfg.learning_rate, steps=steps)

    @staticmethod
    def _forget_fraction(model: Network, forget: Dataset) -> float:
        return TrainingService.accuracy(model, forget) / 100.0

    @staticmethod
    def _clipped_gradients(model: Network, data: Dataset, index: np.ndarray, clip: Optional[float]) -> Gradients:
        # normalization statistics stay frozen while unlearning
        _, grads = TrainingService.compute_gradients(model, data.inputs[index], data.labels[index], training=False)
        if clip is not None:
            grads = TrainingService.clip_gradients(grads, clip)
        return grads

    @staticmethod
    def neggrad(model: Network, forget: Dataset, cfg: BaselineConfig) -> BaselineResult:
        """
        Gradient ascent on the forget subset with clipped gradients.

        Every `check_interval` steps the forget accuracy is measured and the
        loop exits once it drops below `acc_f_threshold`.
        """
        if len(forget) == 0:
            raise ValidationException("NegGrad needs forget data")
        unlearned = model.clone()
        rng = np.random.default_rng(cfg.seed if cfg.seed is not None else unlearned.seed)
        stream = _batch_stream(forget, cfg.forget_batch_size, rng)
        optimizer = SGD(lr=cfg.learning_rate)
        checks: List[Tuple[int, float]] = []
        step = 0
        for step in range(1, cfg.max_steps + 1):
            grads = BaselineService._clipped_gradients(unlearned, forget, next(stream), cfg.clip_threshold)
            optimizer.step(unlearned, {name: -g for name, g in grads.items()})
            if step % cfg.check_interval == 0:
                acc_f = BaselineService._forget_fraction(unlearned, forget)
                checks.append((step, acc_f))
                logger.info(f"NegGrad step {step} | acc_f {100 * acc_f:.2f}%")
                if acc_f < cfg.acc_f_threshold:
                    break
        return BaselineResult(unlearned, "neggrad", cfg.learning_rate, step, checks)

    @staticmethod
    def neggrad_plus(model: Network, retain: Dataset, forget: Dataset, cfg: BaselineConfig) -> BaselineResult:
        """
        Clipped ascent on forget batches plus descent on retain batches.

        The ascent term is dropped while the last measured forget accuracy is
        at or below the threshold; the measurement is refreshed every
        `check_interval` steps.
        """
        if len(retain) == 0 or len(forget) == 0:
            raise ValidationException("NegGrad+ needs retain and forget data")
        unlearned = model.clone()
        rng = np.random.default_rng(cfg.seed if cfg.seed is not None else unlearned.seed)
        forget_stream = _batch_stream(forget, cfg.forget_batch_size, rng)
        retain_stream = _batch_stream(retain, cfg.retain_batch_size, rng)
        optimizer = SGD(lr=cfg.learning_rate)

        acc_f = BaselineService._forget_fraction(unlearned, forget)
        checks: List[Tuple[int, float]] = [(0, acc_f)]
        for step in range(1, cfg.max_steps + 1):
            if acc_f > cfg.acc_f_threshold:
                ascent = BaselineService._clipped_gradients(unlearned, forget, next(forget_stream), cfg.clip_threshold)
            else:
                ascent = None
            descent = BaselineService._clipped_gradients(unlearned, retain, next(retain_stream), None)
            combined = descent if ascent is None else {name: descent[name] - ascent[name] for name in descent}
            optimizer.step(unlearned, combined)
            if step % cfg.check_interval == 0:
                acc_f = BaselineService._forget_fraction(unlearned, forget)
                checks.append((step, acc_f))
                logger.info(f"NegGrad+ step {step} | acc_f {100 * acc_f:.2f}%")
        return BaselineResult(unlearned, "neggrad_plus", cfg.learning_rate, cfg.max_steps, checks)

    @staticmethod
    def run(
            method: str,
            model: Network,
            retain: Dataset,
            forget: Dataset,
            cfg: BaselineConfig,
    ) -> BaselineResult:
        if method == "neggrad":
            return BaselineService.neggrad(model, forget, cfg)
        if method == "neggrad_plus":
            return BaselineService.neggrad_plus(model, retain, forget, cfg)
        raise ValidationException(f"Unknown gradient baseline '{method}'")

    @staticmethod
    def tune_learning_rate(
            model: Network,
            retain: Dataset,
            forget: Dataset,
            cfg: BaselineConfig,
            grid: Sequence[float] = BASELINE_LEARNING_RATES,
    ) -> Tuple[float, Dict[float, float]]:
        """
        Learning rate with the best score on the train subsets.

        Returns:
            (best learning rate, score per learning rate); ties keep the earlier grid entry
        """
        if not grid:
            raise ValidationException("Learning-rate grid must not be empty")
        scores: Dict[float, float] = {}
        best_lr, best_score = None, -np.inf
        for lr in grid:
            result = BaselineService.run(cfg.method, model, retain, forget, cfg.model_copy(update={"learning_rate": lr}))
            value = UnlearnService.score(
                TrainingService.accuracy(result.model, retain), TrainingService.accuracy(result.model, forget)
            )
            scores[lr] = value
            logger.info(f"{cfg.method} lr {lr:g} | score {value:.2f}")
            if value > best_score:
                best_lr, best_score = lr, value
        return best_lr, scores
