"""
Stateless array functions shared by the layers: im2col/col2im, unfold,
softmax and the cross-entropy loss.
"""
from typing import Tuple

import numpy as np

from svdunlearn.core.exceptions import ShapeMismatchException, ValidationException


def conv_output_size(size: int, kernel: int, stride: int, padding: int) -> int:
    return (size + 2 * padding - kernel) // stride + 1


def im2col(images: np.ndarray, kernel: int, stride: int = 1, padding: int = 0) -> np.ndarray:
    """
    Flatten every receptive field of an N x C x H x W batch.

    Returns:
        (N * h_o * w_o) x (C * k * k) matrix, rows ordered sample-major then
        row-major over output locations; columns ordered (channel, ky, kx).
    """
    if images.ndim != 4:
        raise ShapeMismatchException("im2col", "N x C x H x W", images.shape)
    n, channels, height, width = images.shape
    out_h = conv_output_size(height, kernel, stride, padding)
    out_w = conv_output_size(width, kernel, stride, padding)
    if out_h < 1 or out_w < 1:
        raise ValidationException(
            f"Kernel {kernel} is larger than the padded input {height + 2 * padding}x{width + 2 * padding}"
        )

    padded = np.pad(images, [(0, 0), (0, 0), (padding, padding), (padding, padding)], mode="constant")
    cols = np.zeros((n, channels, kernel, kernel, out_h, out_w))
    for y in range(kernel):
        y_max = y + stride * out_h
        for x in range(kernel):
            x_max = x + stride * out_w
            cols[:, :, y, x, :, :] = padded[:, :, y:y_max:stride, x:x_max:stride]

    # (N, C, k, k, h_o, w_o) -> (N, h_o, w_o, C, k, k)
    return cols.transpose(0, 4, 5, 1, 2, 3).reshape(n * out_h * out_w, -1)


def col2im(
        cols: np.ndarray,
        input_shape: Tuple[int, int, int, int],
        kernel: int,
        stride: int = 1,
        padding: int = 0,
) -> np.ndarray:
    """Adjoint of im2col: scatter-add patch gradients back onto the input grid."""
    n, channels, height, width = input_shape
    out_h = conv_output_size(height, kernel, stride, padding)
    out_w = conv_output_size(width, kernel, stride, padding)

    cols = cols.reshape(n, out_h, out_w, channels, kernel, kernel).transpose(0, 3, 4, 5, 1, 2)
    padded = np.zeros((n, channels, height + 2 * padding, width + 2 * padding))
    for y in range(kernel):
        y_max = y + stride * out_h
        for x in range(kernel):
            x_max = x + stride * out_w
            padded[:, :, y:y_max:stride, x:x_max:stride] += cols[:, :, y, x, :, :]
    return padded[:, :, padding:padding + height, padding:padding + width]


def unfold(activation: np.ndarray, kernel: int, stride: int = 1, padding: int = 0) -> np.ndarray:
    """
    Unfold one C_i x H x W activation into its h_o*w_o x C_i*k*k patch matrix.

    unfold(x) @ W.reshape(C_o, -1).T equals the convolution output at every
    output location.
    """
    if activation.ndim != 3:
        raise ShapeMismatchException("unfold", "C x H x W", activation.shape)
    return im2col(activation[np.newaxis], kernel, stride, padding)


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - np.max(logits, axis=1, keepdims=True)
    exp = np.exp(shifted)
    return exp / np.sum(exp, axis=1, keepdims=True)


def cross_entropy(logits: np.ndarray, targets: np.ndarray) -> Tuple[float, np.ndarray]:
    """
    Mean softmax cross-entropy and its gradient with respect to the logits.
    """
    n = logits.shape[0]
    shifted = logits - np.max(logits, axis=1, keepdims=True)
    log_norm = np.log(np.sum(np.exp(shifted), axis=1, keepdims=True))
    log_probs = shifted - log_norm
    loss = -float(np.mean(log_probs[np.arange(n), targets]))

    grad = np.exp(log_probs)
    grad[np.arange(n), targets] -= 1.0
    grad /= n
    return loss, grad
