"""
SGD with (optionally Nesterov) momentum.

Update rule:
    g   = grad + weight_decay * param
    v   = momentum * v + g
    d   = g + momentum * v     (Nesterov)   or   v   (classic)
    param = param - lr * d
"""
from typing import Dict

import numpy as np

from svdunlearn.models.network import Network
from svdunlearn.schemas.training import TrainConfig


class SGD:
    """Momentum SGD over the parameters of one network."""

    def __init__(
            self,
            lr: float,
            momentum: float = 0.0,
            nesterov: bool = False,
            weight_decay: float = 0.0,
    ):
        self.lr = lr
        self.momentum = momentum
        self.nesterov = nesterov
        self.weight_decay = weight_decay
        self.velocity: Dict[str, np.ndarray] = {}

    @classmethod
    def from_config(cls, cfg: TrainConfig) -> "SGD":
        return cls(
            lr=cfg.learning_rate,
            momentum=cfg.momentum,
            nesterov=cfg.nesterov,
            weight_decay=cfg.weight_decay,
        )

    def step(self, model: Network, grads: Dict[str, np.ndarray]) -> None:
        """Apply one update using `grads` keyed like `model.named_parameters()`."""
        for position, layer in enumerate(model.layers):
            for name, param in layer.params.items():
                key = f"layers.{position}.{name}"
                g = grads[key]
                if self.weight_decay:
                    g = g + self.weight_decay * param
                if self.momentum:
                    buf = self.velocity.get(key)
                    buf = g.copy() if buf is None else self.momentum * buf + g
                    self.velocity[key] = buf
                    g = g + self.momentum * buf if self.nesterov else buf
                layer.params[name] = param - self.lr * g
