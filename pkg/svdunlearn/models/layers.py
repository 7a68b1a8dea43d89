"""
Layers of the network engine.

Each layer caches what its backward pass needs during `forward` and writes
parameter gradients into `self.grads` during `backward`.
"""
from typing import Dict, Optional

import numpy as np

from svdunlearn.core.exceptions import ShapeMismatchException
from svdunlearn.models.functional import col2im, conv_output_size, im2col
from svdunlearn.schemas.layer import (
    BatchNorm1dSpec,
    Conv2dSpec,
    FlattenSpec,
    LayerSpec,
    LinearSpec,
    ReLUSpec,
)


class Layer:
    """Base layer: forward/backward with cached inputs."""

    projectable = False

    def __init__(self, spec):
        self.spec = spec
        self.params: Dict[str, np.ndarray] = {}
        self.grads: Dict[str, np.ndarray] = {}
        self.buffers: Dict[str, np.ndarray] = {}
        self._cache = None

    def forward(self, x: np.ndarray, training: bool = False) -> np.ndarray:
        raise NotImplementedError

    def backward(self, grad_out: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def zero_grad(self) -> None:
        self.grads = {name: np.zeros_like(value) for name, value in self.params.items()}

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.spec.model_dump(exclude={'kind'})})"


class Linear(Layer):
    projectable = True

    def __init__(self, spec: LinearSpec, rng: np.random.Generator):
        super().__init__(spec)
        bound = 1.0 / np.sqrt(spec.in_features)
        self.params["weight"] = rng.uniform(-bound, bound, size=(spec.out_features, spec.in_features))
        self.params["bias"] = rng.uniform(-bound, bound, size=spec.out_features)
        self.zero_grad()

    @property
    def input_dim(self) -> int:
        return self.spec.in_features

    @property
    def output_dim(self) -> int:
        return self.spec.out_features

    def forward(self, x: np.ndarray, training: bool = False) -> np.ndarray:
        if x.ndim != 2 or x.shape[1] != self.spec.in_features:
            raise ShapeMismatchException("Linear.forward", f"(N, {self.spec.in_features})", x.shape)
        self._cache = x
        return x @ self.params["weight"].T + self.params["bias"]

    def backward(self, grad_out: np.ndarray) -> np.ndarray:
        x = self._cache
        self.grads["weight"] = grad_out.T @ x
        self.grads["bias"] = grad_out.sum(axis=0)
        return grad_out @ self.params["weight"]

    def representation(self, inputs: np.ndarray) -> np.ndarray:
        """Rows of the representation matrix contributed by these input activations."""
        return inputs

    def output_representation(self, outputs: np.ndarray) -> np.ndarray:
        return outputs


class Conv2d(Layer):
    """Convolution with weights stored as C_o x (C_i * k * k)."""

    projectable = True

    def __init__(self, spec: Conv2dSpec, rng: np.random.Generator):
        super().__init__(spec)
        fan_in = spec.in_channels * spec.kernel * spec.kernel
        bound = 1.0 / np.sqrt(fan_in)
        self.params["weight"] = rng.uniform(-bound, bound, size=(spec.out_channels, fan_in))
        self.params["bias"] = rng.uniform(-bound, bound, size=spec.out_channels)
        self.zero_grad()

    @property
    def input_dim(self) -> int:
        return self.spec.in_channels * self.spec.kernel * self.spec.kernel

    @property
    def output_dim(self) -> int:
        return self.spec.out_channels

    def forward(self, x: np.ndarray, training: bool = False) -> np.ndarray:
        if x.ndim != 4 or x.shape[1] != self.spec.in_channels:
            raise ShapeMismatchException("Conv2d.forward", f"(N, {self.spec.in_channels}, H, W)", x.shape)
        spec = self.spec
        n, _, height, width = x.shape
        out_h = conv_output_size(height, spec.kernel, spec.stride, spec.padding)
        out_w = conv_output_size(width, spec.kernel, spec.stride, spec.padding)
        cols = im2col(x, spec.kernel, spec.stride, spec.padding)
        self._cache = (x.shape, cols, out_h, out_w)
        out = cols @ self.params["weight"].T + self.params["bias"]
        return out.reshape(n, out_h, out_w, spec.out_channels).transpose(0, 3, 1, 2)

    def backward(self, grad_out: np.ndarray) -> np.ndarray:
        input_shape, cols, _, _ = self._cache
        spec = self.spec
        flat = grad_out.transpose(0, 2, 3, 1).reshape(-1, spec.out_channels)
        self.grads["weight"] = flat.T @ cols
        self.grads["bias"] = flat.sum(axis=0)
        grad_cols = flat @ self.params["weight"]
        return col2im(grad_cols, input_shape, spec.kernel, spec.stride, spec.padding)

    def representation(self, inputs: np.ndarray) -> np.ndarray:
        """Stacked transposed unfold of every sample: (K * h_o * w_o) x (C_i * k * k)."""
        return im2col(inputs, self.spec.kernel, self.spec.stride, self.spec.padding)

    def output_representation(self, outputs: np.ndarray) -> np.ndarray:
        """Output activations as one C_o-vector per sample and location."""
        return outputs.transpose(0, 2, 3, 1).reshape(-1, self.spec.out_channels)


class ReLU(Layer):
    def __init__(self, spec: ReLUSpec):
        super().__init__(spec)

    def forward(self, x: np.ndarray, training: bool = False) -> np.ndarray:
        mask = x > 0
        self._cache = mask
        return x * mask

    def backward(self, grad_out: np.ndarray) -> np.ndarray:
        return grad_out * self._cache


class BatchNorm1d(Layer):
    """Batch statistics in training mode, running statistics in inference mode."""

    def __init__(self, spec: BatchNorm1dSpec):
        super().__init__(spec)
        self.params["gamma"] = np.ones(spec.num_features)
        self.params["beta"] = np.zeros(spec.num_features)
        self.buffers["running_mean"] = np.zeros(spec.num_features)
        self.buffers["running_var"] = np.ones(spec.num_features)
        self.zero_grad()

    def forward(self, x: np.ndarray, training: bool = False) -> np.ndarray:
        if x.ndim != 2 or x.shape[1] != self.spec.num_features:
            raise ShapeMismatchException("BatchNorm1d.forward", f"(N, {self.spec.num_features})", x.shape)
        eps = self.spec.epsilon
        if training:
            n = x.shape[0]
            mean = x.mean(axis=0)
            var = x.var(axis=0)
            momentum = self.spec.momentum
            unbiased = var * n / (n - 1) if n > 1 else var
            self.buffers["running_mean"] = (1 - momentum) * self.buffers["running_mean"] + momentum * mean
            self.buffers["running_var"] = (1 - momentum) * self.buffers["running_var"] + momentum * unbiased
        else:
            mean = self.buffers["running_mean"]
            var = self.buffers["running_var"]
        inv_std = 1.0 / np.sqrt(var + eps)
        x_hat = (x - mean) * inv_std
        self._cache = (x_hat, inv_std, training)
        return x_hat * self.params["gamma"] + self.params["beta"]

    def backward(self, grad_out: np.ndarray) -> np.ndarray:
        x_hat, inv_std, training = self._cache
        gamma = self.params["gamma"]
        self.grads["gamma"] = np.sum(grad_out * x_hat, axis=0)
        self.grads["beta"] = np.sum(grad_out, axis=0)
        grad_x_hat = grad_out * gamma
        if not training:
            return grad_x_hat * inv_std
        n = grad_out.shape[0]
        return (inv_std / n) * (
            n * grad_x_hat
            - np.sum(grad_x_hat, axis=0)
            - x_hat * np.sum(grad_x_hat * x_hat, axis=0)
        )


class Flatten(Layer):
    def __init__(self, spec: FlattenSpec):
        super().__init__(spec)

    def forward(self, x: np.ndarray, training: bool = False) -> np.ndarray:
        self._cache = x.shape
        return x.reshape(x.shape[0], -1)

    def backward(self, grad_out: np.ndarray) -> np.ndarray:
        return grad_out.reshape(self._cache)


def build_layer(spec: LayerSpec, rng: Optional[np.random.Generator] = None) -> Layer:
    """Instantiate a layer from its spec."""
    if rng is None:
        rng = np.random.default_rng(0)
    if isinstance(spec, LinearSpec):
        return Linear(spec, rng)
    if isinstance(spec, Conv2dSpec):
        return Conv2d(spec, rng)
    if isinstance(spec, ReLUSpec):
        return ReLU(spec)
    if isinstance(spec, BatchNorm1dSpec):
        return BatchNorm1d(spec)
    if isinstance(spec, FlattenSpec):
        return Flatten(spec)
    raise ShapeMismatchException("build_layer", "known layer kind", type(spec).__name__)
