"""
Convolution primitives over (channels, rows, cols) float64 maps.

conv3x3: stride 1, one pixel of replicate ("edge") padding, so rows/cols are preserved.
max_pool2x2: 2x2 windows, stride 2, trailing odd row/col dropped; ties go to the
lowest row-major index inside the window.
"""
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..errors import ShapeError

KERNEL = 3


@dataclass
class ConvCache:
    input_shape: Tuple[int, int, int]
    windows: np.ndarray


def conv3x3_forward(x: np.ndarray, W: np.ndarray, b: np.ndarray) -> Tuple[np.ndarray, ConvCache]:
    """x: (C_in, H, W_) -> (C_out, H, W_); W: (C_out, C_in, 3, 3); b: (C_out,)"""
    if x.ndim != 3 or W.shape[1:] != (x.shape[0], KERNEL, KERNEL) or b.shape != (W.shape[0],):
        raise ShapeError(f"conv got x {x.shape}, W {W.shape}, b {b.shape}")
    padded = np.pad(x, ((0, 0), (1, 1), (1, 1)), mode="edge")
    windows = sliding_window_view(padded, (KERNEL, KERNEL), axis=(1, 2))  # (C_in, H, W_, 3, 3)
    out = np.tensordot(W, windows, axes=([1, 2, 3], [0, 3, 4])) + b[:, np.newaxis, np.newaxis]
    return out, ConvCache(x.shape, windows)


def conv3x3_backward(dout: np.ndarray, cache: ConvCache,
                     W: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Returns (dx, dW, db)"""
    channels, rows, cols = cache.input_shape
    dW = np.tensordot(dout, cache.windows, axes=([1, 2], [1, 2]))
    db = dout.sum(axis=(1, 2))

    dpadded = np.zeros((channels, rows + 2, cols + 2))
    for i in range(KERNEL):
        for j in range(KERNEL):
            dpadded[:, i:i + rows, j:j + cols] += np.tensordot(W[:, :, i, j], dout, axes=([0], [0]))
    return _fold_edge_padding(dpadded), dW, db


def _fold_edge_padding(dpadded: np.ndarray) -> np.ndarray:
    """Route gradients of replicated border pixels back to the pixels they copy"""
    dx = dpadded[:, 1:-1, 1:-1].copy()
    dx[:, 0, :] += dpadded[:, 0, 1:-1]
    dx[:, -1, :] += dpadded[:, -1, 1:-1]
    dx[:, :, 0] += dpadded[:, 1:-1, 0]
    dx[:, :, -1] += dpadded[:, 1:-1, -1]
    dx[:, 0, 0] += dpadded[:, 0, 0]
    dx[:, 0, -1] += dpadded[:, 0, -1]
    dx[:, -1, 0] += dpadded[:, -1, 0]
    dx[:, -1, -1] += dpadded[:, -1, -1]
    return dx


def relu_forward(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0)


def relu_backward(dout: np.ndarray, x: np.ndarray) -> np.ndarray:
    return dout * (x > 0.0)


@dataclass
class PoolCache:
    input_shape: Tuple[int, int, int]
    argmax: np.ndarray


def max_pool2x2_forward(x: np.ndarray) -> Tuple[np.ndarray, PoolCache]:
    channels, rows, cols = x.shape
    out_rows, out_cols = rows // 2, cols // 2
    if out_rows == 0 or out_cols == 0:
        raise ShapeError(f"max pool needs at least 2x2 input, got {rows}x{cols}")
    blocks = (x[:, :2 * out_rows, :2 * out_cols]
              .reshape(channels, out_rows, 2, out_cols, 2)
              .transpose(0, 1, 3, 2, 4)
              .reshape(channels, out_rows, out_cols, 4))
    argmax = blocks.argmax(axis=-1)
    out = np.take_along_axis(blocks, argmax[..., np.newaxis], axis=-1)[..., 0]
    return out, PoolCache(x.shape, argmax)


def max_pool2x2_backward(dout: np.ndarray, cache: PoolCache) -> np.ndarray:
    channels, rows, cols = cache.input_shape
    out_rows, out_cols = dout.shape[1:]
    dblocks = np.zeros((channels, out_rows, out_cols, 4))
    np.put_along_axis(dblocks, cache.argmax[..., np.newaxis], dout[..., np.newaxis], axis=-1)
    dx = np.zeros(cache.input_shape)
    dx[:, :2 * out_rows, :2 * out_cols] = (dblocks
                                           .reshape(channels, out_rows, out_cols, 2, 2)
                                           .transpose(0, 1, 3, 2, 4)
                                           .reshape(channels, 2 * out_rows, 2 * out_cols))
    return dx


def global_average_pool_forward(x: np.ndarray) -> np.ndarray:
    return x.mean(axis=(1, 2))


def global_average_pool_backward(dout: np.ndarray, input_shape: Tuple[int, int, int]) -> np.ndarray:
    _, rows, cols = input_shape
    return np.broadcast_to(dout[:, np.newaxis, np.newaxis] / (rows * cols), input_shape).copy()
