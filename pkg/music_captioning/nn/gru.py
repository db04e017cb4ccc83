"""
Gated recurrent unit cell with hand-derived gradients.

Convention (used everywhere in this package):
    z  = sigmoid(W_z x + U_z h_prev + b_z)
    r  = sigmoid(W_r x + U_r h_prev + b_r)
    hc = tanh(W_h x + U_h (r * h_prev) + b_h)
    h  = (1 - z) * h_prev + z * hc
"""
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np
from scipy.special import expit

from ..errors import ShapeError, StaleCacheError
from .initializers import glorot_uniform

GRU_PARAM_NAMES = ("W_z", "W_r", "W_h", "U_z", "U_r", "U_h", "b_z", "b_r", "b_h")


@dataclass
class GruCellParams:
    """Input-to-hidden (H x I), hidden-to-hidden (H x H) and bias (H) tensors of one cell"""
    W_z: np.ndarray
    W_r: np.ndarray
    W_h: np.ndarray
    U_z: np.ndarray
    U_r: np.ndarray
    U_h: np.ndarray
    b_z: np.ndarray
    b_r: np.ndarray
    b_h: np.ndarray

    def __post_init__(self):
        hidden, inputs = self.W_z.shape
        for name in GRU_PARAM_NAMES:
            expected = {"W": (hidden, inputs), "U": (hidden, hidden), "b": (hidden,)}[name[0]]
            if getattr(self, name).shape != expected:
                raise ShapeError(f"GRU parameter {name} has shape {getattr(self, name).shape}, expected {expected}")

    @property
    def hidden_size(self) -> int:
        return self.W_z.shape[0]

    @property
    def input_size(self) -> int:
        return self.W_z.shape[1]

    @classmethod
    def zeros(cls, input_size: int, hidden_size: int) -> "GruCellParams":
        return cls(**{name: np.zeros(_shape(name, input_size, hidden_size)) for name in GRU_PARAM_NAMES})

    @classmethod
    def initialize(cls, input_size: int, hidden_size: int, rng: np.random.Generator) -> "GruCellParams":
        """Glorot-uniform weights, zero biases"""
        tensors = {}
        for name in GRU_PARAM_NAMES:
            shape = _shape(name, input_size, hidden_size)
            if name[0] == "b":
                tensors[name] = np.zeros(shape)
            else:
                tensors[name] = glorot_uniform(rng, shape, fan_in=shape[1], fan_out=shape[0])
        return cls(**tensors)

    def named_tensors(self, prefix: str) -> Dict[str, np.ndarray]:
        return {f"{prefix}.{name}": getattr(self, name) for name in GRU_PARAM_NAMES}


def _shape(name: str, input_size: int, hidden_size: int) -> Tuple[int, ...]:
    if name[0] == "W":
        return (hidden_size, input_size)
    if name[0] == "U":
        return (hidden_size, hidden_size)
    return (hidden_size,)


@dataclass
class GruCache:
    params: GruCellParams
    x: np.ndarray
    h_prev: np.ndarray
    z: np.ndarray
    r: np.ndarray
    h_cand: np.ndarray
    rh: np.ndarray


def gru_cell_forward(x: np.ndarray, h_prev: np.ndarray, params: GruCellParams,
                     mask: Optional[np.ndarray] = None) -> Tuple[np.ndarray, GruCache]:
    """
    One GRU step.

    Args:
        x: input of shape (I,) or a batch (B, I)
        h_prev: previous state (H,) or (B, H)
        params: cell parameters
        mask: optional boolean (B,) batch mask; rows with False keep h_prev unchanged

    Returns:
        (h, cache) where cache feeds gru_cell_backward for unbatched steps
    """
    if x.shape[-1] != params.input_size or h_prev.shape[-1] != params.hidden_size:
        raise ShapeError(f"GRU step got x {x.shape}, h_prev {h_prev.shape} for "
                         f"I={params.input_size}, H={params.hidden_size}")
    if x.shape[:-1] != h_prev.shape[:-1]:
        raise ShapeError(f"batch shapes of x {x.shape} and h_prev {h_prev.shape} differ")

    z = expit(x @ params.W_z.T + h_prev @ params.U_z.T + params.b_z)
    r = expit(x @ params.W_r.T + h_prev @ params.U_r.T + params.b_r)
    rh = r * h_prev
    h_cand = np.tanh(x @ params.W_h.T + rh @ params.U_h.T + params.b_h)
    h = (1.0 - z) * h_prev + z * h_cand

    if mask is not None:
        h = np.where(mask[:, np.newaxis], h, h_prev)

    return h, GruCache(params, x, h_prev, z, r, h_cand, rh)


def gru_cell_backward(dh: np.ndarray, cache: GruCache,
                      params: GruCellParams) -> Tuple[np.ndarray, np.ndarray, Dict[str, np.ndarray]]:
    """
    Backward pass of one unbatched GRU step.

    Args:
        dh: gradient of a downstream scalar w.r.t. the step output h, shape (H,)
        cache: cache from the matching gru_cell_forward call
        params: the parameters the forward call used

    Returns:
        (dx, dh_prev, grads) with grads keyed by GRU_PARAM_NAMES
    """
    if cache.params is not params:
        raise StaleCacheError("GRU cache was produced with different parameters")
    if dh.shape != (params.hidden_size,) or cache.x.ndim != 1:
        raise StaleCacheError(f"GRU backward got dh {dh.shape} for cache of x {cache.x.shape}")

    x, h_prev, z, r, h_cand, rh = cache.x, cache.h_prev, cache.z, cache.r, cache.h_cand, cache.rh

    dh_prev = dh * (1.0 - z)
    da_h = dh * z * (1.0 - h_cand ** 2)
    da_z = dh * (h_cand - h_prev) * z * (1.0 - z)

    drh = params.U_h.T @ da_h
    dh_prev += drh * r
    da_r = drh * h_prev * r * (1.0 - r)

    dh_prev += params.U_z.T @ da_z + params.U_r.T @ da_r
    dx = params.W_h.T @ da_h + params.W_z.T @ da_z + params.W_r.T @ da_r

    grads = {
        "W_z": np.outer(da_z, x),
        "W_r": np.outer(da_r, x),
        "W_h": np.outer(da_h, x),
        "U_z": np.outer(da_z, h_prev),
        "U_r": np.outer(da_r, h_prev),
        "U_h": np.outer(da_h, rh),
        "b_z": da_z,
        "b_r": da_r,
        "b_h": da_h,
    }
    return dx, dh_prev, grads
