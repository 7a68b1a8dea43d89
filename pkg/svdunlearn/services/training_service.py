"""
Training Service

Gradient computation, clipping, single optimizer steps and full training runs.
"""
from typing import Callable, Dict, Literal, Optional, Tuple

import numpy as np

from svdunlearn.core.exceptions import NonFiniteLossException, ValidationException
from svdunlearn.core.logging_config import get_logger
from svdunlearn.models.dataset import Dataset
from svdunlearn.models.functional import cross_entropy
from svdunlearn.models.network import Network
from svdunlearn.models.optimizer import SGD
from svdunlearn.schemas.layer import ArchitectureSpec
from svdunlearn.schemas.training import TrainConfig

logger = get_logger("training")

Direction = Literal["descent", "ascent"]
Gradients = Dict[str, np.ndarray]


class TrainingService:
    """Service for gradient-based optimization of networks."""

    @staticmethod
    def compute_gradients(
            model: Network,
            inputs: np.ndarray,
            targets: np.ndarray,
            training: bool = True,
    ) -> Tuple[float, Gradients]:
        """Cross-entropy loss and a copy of every parameter gradient."""
        targets = np.asarray(targets, dtype=np.int64)
        if targets.shape != (np.asarray(inputs).shape[0],):
            raise ValidationException("targets must hold one class index per batch row")
        if targets.size and (targets.min() < 0 or targets.max() >= model.num_classes):
            raise ValidationException(f"targets must lie in [0, {model.num_classes})")

        model.zero_grad()
        logits = model.forward(inputs, training=training).logits
        loss, grad_logits = cross_entropy(logits, targets)
        if not np.isfinite(loss):
            raise NonFiniteLossException(loss)
        model.backward(grad_logits)
        return loss, {name: grad.copy() for name, grad in model.named_gradients()}

    @staticmethod
    def global_norm(grads: Gradients) -> float:
        return float(np.sqrt(sum(float(np.sum(g * g)) for g in grads.values())))

    @staticmethod
    def clip_gradients(grads: Gradients, threshold: float) -> Gradients:
        """Rescale so the global norm is at most `threshold`."""
        norm = TrainingService.global_norm(grads)
        if norm <= threshold or norm == 0.0:
            return grads
        scale = threshold / norm
        return {name: g * scale for name, g in grads.items()}

    @staticmethod
    def backward_sgd_step(
            model: Network,
            batch: np.ndarray,
            targets: np.ndarray,
            cfg: TrainConfig,
            direction: Direction = "descent",
            optimizer: Optional[SGD] = None,
            training: bool = True,
    ) -> float:
        """
        One optimizer step on a batch. Ascent negates the gradient.

        Returns:
            Loss of the batch before the step
        """
        if direction not in ("descent", "ascent"):
            raise ValidationException(f"Unknown direction '{direction}'")
        if optimizer is None:
            optimizer = SGD.from_config(cfg)

        loss, grads = TrainingService.compute_gradients(model, batch, targets, training=training)
        if cfg.clip_threshold is not None:
            grads = TrainingService.clip_gradients(grads, cfg.clip_threshold)
        if direction == "ascent":
            grads = {name: -g for name, g in grads.items()}
        optimizer.step(model, grads)
        return loss

    @staticmethod
    def batch_order(n: int, batch_size: int, rng: np.random.Generator):
        """Shuffled mini-batch index arrays for one epoch."""
        order = rng.permutation(n)
        return [order[start:start + batch_size] for start in range(0, n, batch_size)]

    @staticmethod
    def train(
            model: Network,
            data: Dataset,
            cfg: TrainConfig,
            on_epoch: Optional[Callable[[int, float], None]] = None,
    ) -> Network:
        """
        Mini-batch SGD for `cfg.epochs` epochs with a seeded shuffle per epoch.
        """
        if len(data) == 0:
            raise ValidationException("Cannot train on an empty dataset")

        rng = np.random.default_rng(cfg.seed)
        optimizer = SGD.from_config(cfg)
        for epoch in range(cfg.epochs):
            losses = []
            for index in TrainingService.batch_order(len(data), cfg.batch_size, rng):
                loss = TrainingService.backward_sgd_step(
                    model, data.inputs[index], data.labels[index], cfg, optimizer=optimizer
                )
                losses.append(loss)
            mean_loss = float(np.mean(losses))
            logger.info(f"Epoch {epoch + 1}/{cfg.epochs} | loss {mean_loss:.4f}")
            if on_epoch is not None:
                on_epoch(epoch, mean_loss)
        return model

    @staticmethod
    def fit_new(architecture: ArchitectureSpec, data: Dataset, cfg: TrainConfig) -> Network:
        """Fresh initialization from `cfg.seed`, then train."""
        model = Network(architecture, seed=cfg.seed)
        return TrainingService.train(model, data, cfg)

    @staticmethod
    def accuracy(model: Network, data: Dataset) -> float:
        """Percentage of correctly classified rows (0 for an empty set)."""
        if len(data) == 0:
            return 0.0
        predictions = model.predict(data.inputs)
        return 100.0 * float(np.mean(predictions == data.labels))
