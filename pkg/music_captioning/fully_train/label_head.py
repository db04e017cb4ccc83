"""
Auxiliary label head and the multi-task objective.
"""
from dataclasses import dataclass
from typing import Dict, NamedTuple, Tuple

import numpy as np
from scipy.special import expit

from ..errors import DataError, ShapeError
from ..nn import binary_cross_entropy, dense_backward, dense_forward, glorot_uniform


@dataclass
class LabelHeadParams:
    """dense(D_track -> L) followed by the logistic function"""
    W: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        if self.W.ndim != 2 or self.b.shape != (self.W.shape[0],):
            raise ShapeError(f"label head W {self.W.shape} and b {self.b.shape} are inconsistent")

    @property
    def num_labels(self) -> int:
        return self.b.shape[0]

    @property
    def input_dim(self) -> int:
        return self.W.shape[1]

    @classmethod
    def zeros(cls, input_dim: int, num_labels: int) -> "LabelHeadParams":
        return cls(np.zeros((num_labels, input_dim)), np.zeros(num_labels))

    @classmethod
    def initialize(cls, input_dim: int, num_labels: int, rng: np.random.Generator) -> "LabelHeadParams":
        return cls(glorot_uniform(rng, (num_labels, input_dim), fan_in=input_dim, fan_out=num_labels),
                   np.zeros(num_labels))

    def named_tensors(self, prefix: str) -> Dict[str, np.ndarray]:
        return {f"{prefix}.W": self.W, f"{prefix}.b": self.b}


def label_head_forward(params: LabelHeadParams, feature: np.ndarray) -> np.ndarray:
    """Label probabilities in (0, 1)^L"""
    return expit(dense_forward(feature, params.W, params.b))


def label_head_backward(doutputs: np.ndarray, feature: np.ndarray, outputs: np.ndarray,
                        params: LabelHeadParams) -> Tuple[np.ndarray, Dict[str, np.ndarray]]:
    """Returns (d feature, {"W": dW, "b": db})"""
    dlogits = doutputs * outputs * (1.0 - outputs)
    dfeature, dW, db = dense_backward(dlogits, feature, params.W)
    return dfeature, {"W": dW, "b": db}


class MultitaskLoss(NamedTuple):
    total: float
    label_loss: float
    doutputs: np.ndarray


def multitask_loss(caption_loss: float, outputs: np.ndarray, labels: np.ndarray, weight: float) -> MultitaskLoss:
    """
    total = caption_loss + weight * BCE(outputs, labels).

    doutputs is d total / d outputs (already scaled by weight).
    """
    if weight < 0:
        raise DataError(f"label weight must be non-negative, got {weight}")
    bce, doutputs = binary_cross_entropy(np.asarray(outputs, dtype=np.float64), np.asarray(labels, dtype=np.float64))
    return MultitaskLoss(caption_loss + weight * bce, bce, weight * doutputs)
