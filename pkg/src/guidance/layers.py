"""
Layer primitives with explicit backward passes.

Tensors are laid out (batch, channels, height, width). Each forward returns
what its backward needs; backward functions take the upstream gradient and
return the gradient for the input (plus parameter gradients where present).
"""

from typing import Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.special import expit


def _windows(x: np.ndarray, k: int) -> np.ndarray:
    pad = k // 2
    padded = np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad))) if pad else x
    return sliding_window_view(padded, (k, k), axis=(2, 3))  # N, C, H, W, k, k


def conv2d_forward(x: np.ndarray, w: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Same-padded convolution, odd square kernel w: (out, in, k, k)"""
    k = w.shape[-1]
    y = np.tensordot(_windows(x, k), w, axes=([1, 4, 5], [1, 2, 3]))  # N, H, W, out
    return y.transpose(0, 3, 1, 2) + b[None, :, None, None]


def conv2d_backward(x: np.ndarray, w: np.ndarray,
                    grad_y: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(grad_x, grad_w, grad_b)"""
    k = w.shape[-1]
    grad_b = grad_y.sum(axis=(0, 2, 3))
    grad_w = np.tensordot(grad_y, _windows(x, k), axes=([0, 2, 3], [0, 2, 3]))
    flipped = w[:, :, ::-1, ::-1]
    grad_x = np.tensordot(_windows(grad_y, k), flipped, axes=([1, 4, 5], [0, 2, 3]))
    return grad_x.transpose(0, 3, 1, 2), grad_w, grad_b


def leaky_relu_forward(z: np.ndarray, slope: float) -> np.ndarray:
    return np.where(z > 0, z, slope * z)


def leaky_relu_backward(z: np.ndarray, grad: np.ndarray, slope: float) -> np.ndarray:
    return np.where(z > 0, grad, slope * grad)


def maxpool2x2_forward(x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """(pooled, argmax) with argmax in 0..3 over each 2x2 block (first max wins)"""
    n, c, h, w = x.shape
    blocks = x.reshape(n, c, h // 2, 2, w // 2, 2).transpose(0, 1, 2, 4, 3, 5).reshape(n, c, h // 2, w // 2, 4)
    argmax = blocks.argmax(axis=-1)
    return np.take_along_axis(blocks, argmax[..., None], axis=-1)[..., 0], argmax


def maxpool2x2_backward(grad: np.ndarray, argmax: np.ndarray) -> np.ndarray:
    n, c, h2, w2 = grad.shape
    routed = np.zeros((n, c, h2, w2, 4), dtype=grad.dtype)
    np.put_along_axis(routed, argmax[..., None], grad[..., None], axis=-1)
    return routed.reshape(n, c, h2, w2, 2, 2).transpose(0, 1, 2, 4, 3, 5).reshape(n, c, 2 * h2, 2 * w2)


def upsample2x_forward(x: np.ndarray) -> np.ndarray:
    return x.repeat(2, axis=2).repeat(2, axis=3)


def upsample2x_backward(grad: np.ndarray) -> np.ndarray:
    n, c, h, w = grad.shape
    return grad.reshape(n, c, h // 2, 2, w // 2, 2).sum(axis=(3, 5))


def concat_forward(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.concatenate([a, b], axis=1)


def concat_backward(grad: np.ndarray, split: int) -> Tuple[np.ndarray, np.ndarray]:
    return grad[:, :split], grad[:, split:]


def dropout_mask(shape, rate: float, rng: np.random.Generator) -> np.ndarray:
    """Inverted dropout: kept units are scaled by 1 / (1 - rate)"""
    if rate <= 0.0:
        return np.ones(shape)
    return (rng.random(shape) >= rate) / (1.0 - rate)


# Attention values stay strictly inside (0, 1)
PROBABILITY_EPS = 1e-6


def sigmoid(z: np.ndarray) -> np.ndarray:
    return np.clip(expit(z), PROBABILITY_EPS, 1.0 - PROBABILITY_EPS)


def masked_bce_with_logits(logits: np.ndarray, target: np.ndarray,
                           mask: np.ndarray) -> Tuple[float, np.ndarray]:
    """
    Mean binary cross-entropy over masked cells and its gradient w.r.t. the logits.
    Unmasked cells contribute nothing to either.
    """
    count = max(1.0, float(mask.sum()))
    per_cell = np.logaddexp(0.0, logits) - target * logits
    loss = float((mask * per_cell).sum() / count)
    grad = mask * (expit(logits) - target) / count
    return loss, grad
