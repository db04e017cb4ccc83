"""
Central finite-difference verification of analytic gradients.
"""
import logging
import math
from dataclasses import dataclass
from typing import Callable, Mapping, MutableMapping, Optional, Tuple

import numpy as np

from ..errors import GradientCheckError, ShapeError

logger = logging.getLogger(__name__)

FD_STEP = 1e-6


@dataclass
class GradientCheckReport:
    max_relative_error: float
    max_abs_difference: float
    gradient_scale: float
    worst_parameter: Optional[str]
    worst_index: Optional[Tuple[int, ...]]
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_relative_error < self.tolerance


def _finite_difference_gradient(f: Callable[[], float], value: np.ndarray, step: float) -> np.ndarray:
    """Compute gradient using central differences, perturbing value in place"""
    gradient = np.zeros_like(value)
    for idx in np.ndindex(value.shape):
        original = value[idx]

        value[idx] = original + step
        f_plus = f()
        value[idx] = original - step
        f_minus = f()
        value[idx] = original

        if not (math.isfinite(f_plus) and math.isfinite(f_minus)):
            raise GradientCheckError(f"objective is non-finite near index {idx}")
        gradient[idx] = (f_plus - f_minus) / (2 * step)
    return gradient


def numerical_gradients(f: Callable[[], float], params: MutableMapping[str, np.ndarray],
                        step: float = FD_STEP) -> dict:
    return {name: _finite_difference_gradient(f, value, step) for name, value in params.items()}


def gradient_check(f: Callable[[], float], params: MutableMapping[str, np.ndarray],
                   analytic: Mapping[str, np.ndarray], tolerance: float = 1e-5,
                   step: float = FD_STEP) -> GradientCheckReport:
    """
    Compare analytic gradients with central differences.

    Args:
        f: zero-argument objective reading the current values of params
        params: tensors perturbed in place (restored afterwards)
        analytic: analytic gradients keyed like params
        tolerance: pass threshold on the relative error

    Returns:
        report with max |g_analytic - g_fd| normalized by max(|g_fd|_inf, 1e-8)
    """
    base = f()
    if not math.isfinite(base):
        raise GradientCheckError("objective is non-finite at the check point")

    numeric = numerical_gradients(f, params, step)

    max_diff = 0.0
    scale = 0.0
    worst_name, worst_index = None, None
    for name, fd in numeric.items():
        if analytic[name].shape != fd.shape:
            raise ShapeError(f"analytic gradient for {name} has shape {analytic[name].shape}, expected {fd.shape}")
        scale = max(scale, float(np.max(np.abs(fd))) if fd.size else 0.0)
        if fd.size == 0:
            continue
        diff = np.abs(analytic[name] - fd)
        flat = int(np.argmax(diff))
        if diff.flat[flat] > max_diff:
            max_diff = float(diff.flat[flat])
            worst_name, worst_index = name, np.unravel_index(flat, fd.shape)

    report = GradientCheckReport(
        max_relative_error=max_diff / max(scale, 1e-8),
        max_abs_difference=max_diff,
        gradient_scale=scale,
        worst_parameter=worst_name,
        worst_index=tuple(int(i) for i in worst_index) if worst_index is not None else None,
        tolerance=tolerance,
    )
    logger.debug(f"Gradient check: rel.err={report.max_relative_error:.3e} worst={worst_name}{report.worst_index}")
    return report
