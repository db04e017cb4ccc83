"""
Objectives: 1 - cosine proximity for caption embeddings, clamped binary cross-entropy for labels.
"""
from typing import Tuple

import numpy as np

from ..errors import DataError, IllPosedTargetError, ShapeError

COSINE_EPS = 1e-12
BCE_CLAMP = 1e-7


def cosine_proximity_loss(pred: np.ndarray, target: np.ndarray) -> Tuple[float, np.ndarray]:
    """
    loss = 1 - (pred . target) / ((|pred| + eps)(|target| + eps)), eps = 1e-12.

    Returns:
        (loss, d loss / d pred)
    """
    if pred.shape != target.shape or pred.ndim != 1 or pred.size < 1:
        raise ShapeError(f"cosine loss got pred {pred.shape}, target {target.shape}")
    target_norm = np.linalg.norm(target)
    if target_norm == 0.0:
        raise IllPosedTargetError("all-zero target vector")

    pred_norm = np.linalg.norm(pred)
    a = pred_norm + COSINE_EPS
    b = target_norm + COSINE_EPS
    dot = float(pred @ target)
    loss = 1.0 - dot / (a * b)

    # d|p|/dp = p/|p|, taken as 0 at p = 0
    unit = pred / pred_norm if pred_norm > 0.0 else np.zeros_like(pred)
    dpred = -(target / (a * b) - dot / (a * a * b) * unit)
    return loss, dpred


def sequence_cosine_loss(preds: np.ndarray, targets: np.ndarray) -> Tuple[float, np.ndarray]:
    """Mean of the per-step cosine losses over M steps; gradient has shape (M, D)"""
    if preds.shape != targets.shape or preds.ndim != 2:
        raise ShapeError(f"sequence loss got preds {preds.shape}, targets {targets.shape}")
    steps = preds.shape[0]
    total = 0.0
    dpreds = np.empty_like(preds)
    for m in range(steps):
        loss, dpred = cosine_proximity_loss(preds[m], targets[m])
        total += loss
        dpreds[m] = dpred / steps
    return total / steps, dpreds


def binary_cross_entropy(outputs: np.ndarray, labels: np.ndarray) -> Tuple[float, np.ndarray]:
    """
    -mean_l [y log o + (1 - y) log(1 - o)] with o clamped to [1e-7, 1 - 1e-7].

    Returns:
        (bce, d bce / d outputs); zero gradient where the clamp is active
    """
    if outputs.shape != labels.shape or outputs.ndim != 1:
        raise ShapeError(f"BCE got outputs {outputs.shape}, labels {labels.shape}")
    if np.any(labels < 0.0) or np.any(labels > 1.0) or not np.all(np.isfinite(labels)):
        raise DataError("label values must lie in [0, 1]")

    clamped = np.clip(outputs, BCE_CLAMP, 1.0 - BCE_CLAMP)
    count = outputs.size
    bce = -float(np.mean(labels * np.log(clamped) + (1.0 - labels) * np.log(1.0 - clamped)))
    inside = (outputs >= BCE_CLAMP) & (outputs <= 1.0 - BCE_CLAMP)
    doutputs = np.where(inside, -(labels / clamped - (1.0 - labels) / (1.0 - clamped)) / count, 0.0)
    return bce, doutputs
