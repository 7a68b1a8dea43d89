import copy
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np

from svdunlearn.core.exceptions import NonFiniteValueException, ShapeMismatchException
from svdunlearn.models.layers import BatchNorm1d, Conv2d, Layer, Linear, build_layer
from svdunlearn.schemas.layer import (
    ArchitectureSpec,
    BatchNorm1dSpec,
    Conv2dSpec,
    FlattenSpec,
    LinearSpec,
)


@dataclass
class CapturedActivation:
    """Input and output activation of one linear/conv layer."""
    layer_index: int  # position among linear/conv layers
    position: int  # position in the full layer list
    inputs: np.ndarray
    outputs: np.ndarray


@dataclass
class ForwardResult:
    logits: np.ndarray
    captured: List[CapturedActivation] = field(default_factory=list)


class Network:
    """Ordered layer sequence with forward, backward and parameter access."""

    def __init__(self, architecture: ArchitectureSpec, seed: int = 0):
        self.architecture = architecture
        self.seed = seed
        self._validate(architecture)
        rng = np.random.default_rng(seed)
        self.layers: List[Layer] = [build_layer(spec, rng) for spec in architecture.layers]

    @staticmethod
    def _validate(architecture: ArchitectureSpec) -> None:
        """Check that consecutive layer dimensions compose."""
        shape: Optional[Tuple[int, ...]] = architecture.input_shape
        for position, spec in enumerate(architecture.layers):
            where = f"layer {position} ({spec.kind})"
            if isinstance(spec, Conv2dSpec):
                if shape is None or len(shape) != 3 or shape[0] != spec.in_channels:
                    raise ShapeMismatchException(where, f"({spec.in_channels}, H, W)", shape)
                out_h = (shape[1] + 2 * spec.padding - spec.kernel) // spec.stride + 1
                out_w = (shape[2] + 2 * spec.padding - spec.kernel) // spec.stride + 1
                if out_h < 1 or out_w < 1:
                    raise ShapeMismatchException(where, "kernel within padded input", shape)
                shape = (spec.out_channels, out_h, out_w)
            elif isinstance(spec, FlattenSpec):
                if shape is not None:
                    shape = (int(np.prod(shape)),)
            elif isinstance(spec, LinearSpec):
                if shape is not None and shape != (spec.in_features,):
                    raise ShapeMismatchException(where, (spec.in_features,), shape)
                shape = (spec.out_features,)
            elif isinstance(spec, BatchNorm1dSpec):
                if shape is not None and shape != (spec.num_features,):
                    raise ShapeMismatchException(where, (spec.num_features,), shape)

    @property
    def input_width(self) -> int:
        if self.architecture.input_shape is not None:
            return int(np.prod(self.architecture.input_shape))
        first = self.architecture.layers[0]
        return first.in_features

    @property
    def num_classes(self) -> int:
        for layer in reversed(self.layers):
            if layer.projectable:
                return layer.output_dim
        raise ShapeMismatchException("num_classes", "a linear or conv layer", "none")

    def projectable_layers(self) -> List[Tuple[int, Layer]]:
        """(position, layer) for every linear and conv layer, in order."""
        return [(pos, layer) for pos, layer in enumerate(self.layers) if isinstance(layer, (Linear, Conv2d))]

    def _prepare_input(self, batch: np.ndarray) -> np.ndarray:
        batch = np.asarray(batch, dtype=np.float64)
        if batch.ndim != 2 or batch.shape[1] != self.input_width:
            raise ShapeMismatchException("forward", f"(N, {self.input_width})", batch.shape)
        if not np.all(np.isfinite(batch)):
            raise NonFiniteValueException("forward")
        if self.architecture.input_shape is not None:
            return batch.reshape((batch.shape[0],) + tuple(self.architecture.input_shape))
        return batch

    def forward(self, batch: np.ndarray, capture: bool = False, training: bool = False) -> ForwardResult:
        """
        Run the network on an N x features batch.

        With `capture` set, the input and output activation of every linear and
        conv layer is recorded (conv activations keep their N x C x H x W form).
        Capturing always runs in inference mode.
        """
        training = training and not capture
        x = self._prepare_input(batch)
        captured: List[CapturedActivation] = []
        layer_index = 0
        for position, layer in enumerate(self.layers):
            out = layer.forward(x, training=training)
            if capture and layer.projectable:
                captured.append(CapturedActivation(layer_index, position, x, out))
            if layer.projectable:
                layer_index += 1
            x = out
        return ForwardResult(logits=x, captured=captured)

    def predict(self, batch: np.ndarray, batch_size: int = 4096) -> np.ndarray:
        """Argmax class for every row, in inference mode."""
        batch = np.asarray(batch, dtype=np.float64)
        predictions = [
            np.argmax(self.forward(batch[start:start + batch_size]).logits, axis=1)
            for start in range(0, batch.shape[0], batch_size)
        ]
        return np.concatenate(predictions) if predictions else np.zeros(0, dtype=np.int64)

    def backward(self, grad_logits: np.ndarray) -> np.ndarray:
        grad = grad_logits
        for layer in reversed(self.layers):
            grad = layer.backward(grad)
        return grad

    def zero_grad(self) -> None:
        for layer in self.layers:
            layer.zero_grad()

    def named_parameters(self) -> Iterator[Tuple[str, np.ndarray]]:
        for position, layer in enumerate(self.layers):
            for name, value in layer.params.items():
                yield f"layers.{position}.{name}", value

    def named_gradients(self) -> Iterator[Tuple[str, np.ndarray]]:
        for position, layer in enumerate(self.layers):
            for name in layer.params:
                yield f"layers.{position}.{name}", layer.grads[name]

    def state_dict(self) -> Dict[str, np.ndarray]:
        state = {name: value.copy() for name, value in self.named_parameters()}
        for position, layer in enumerate(self.layers):
            for name, value in layer.buffers.items():
                state[f"layers.{position}.{name}"] = value.copy()
        return state

    def load_state_dict(self, state: Dict[str, np.ndarray]) -> None:
        for position, layer in enumerate(self.layers):
            for store in (layer.params, layer.buffers):
                for name, current in store.items():
                    key = f"layers.{position}.{name}"
                    if key not in state:
                        raise ShapeMismatchException("load_state_dict", key, "missing")
                    value = np.asarray(state[key], dtype=np.float64).reshape(current.shape)
                    store[name] = value.copy()
            layer.zero_grad()

    def batchnorm_layers(self) -> List[BatchNorm1d]:
        return [layer for layer in self.layers if isinstance(layer, BatchNorm1d)]

    def clone(self) -> "Network":
        for layer in self.layers:
            layer._cache = None
        return copy.deepcopy(self)

    def __repr__(self) -> str:
        return f"Network(layers={len(self.layers)}, projectable={len(self.projectable_layers())})"
