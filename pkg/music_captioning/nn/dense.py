"""
Affine layer y = W x + b.
"""
from typing import Tuple

import numpy as np

from ..errors import ShapeError


def dense_forward(x: np.ndarray, W: np.ndarray, b: np.ndarray) -> np.ndarray:
    if W.ndim != 2 or x.shape != (W.shape[1],) or b.shape != (W.shape[0],):
        raise ShapeError(f"dense layer got x {x.shape}, W {W.shape}, b {b.shape}")
    return W @ x + b


def dense_backward(dy: np.ndarray, x: np.ndarray, W: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Returns (dx, dW, db)"""
    if dy.shape != (W.shape[0],) or x.shape != (W.shape[1],):
        raise ShapeError(f"dense backward got dy {dy.shape}, x {x.shape} for W {W.shape}")
    return W.T @ dy, np.outer(dy, x), dy.copy()
