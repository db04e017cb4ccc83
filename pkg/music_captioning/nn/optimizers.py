"""
ADAM optimizer over named float64 parameter tensors.
State is explicit (AdamState) so a training run can be checkpointed and replayed exactly.
"""
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping

import numpy as np

from ..errors import NonFiniteGradientError, ShapeError

logger = logging.getLogger(__name__)


@dataclass
class AdamState:
    """Per-parameter first/second moments, step counter and hyperparameters"""
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    t: int = 0
    m: Dict[str, np.ndarray] = field(default_factory=dict)
    v: Dict[str, np.ndarray] = field(default_factory=dict)

    @classmethod
    def for_params(cls, params: Mapping[str, np.ndarray], **hyperparameters: float) -> "AdamState":
        state = cls(**hyperparameters)
        for name, value in params.items():
            state.m[name] = np.zeros_like(value)
            state.v[name] = np.zeros_like(value)
        return state


def adam_step(params: Mapping[str, np.ndarray], grads: Mapping[str, np.ndarray], state: AdamState) -> AdamState:
    """
    One bias-corrected ADAM update, applied to params in place.

    Every gradient is validated before any tensor is touched, so a rejected
    step leaves parameters and state unchanged.
    """
    for name, value in params.items():
        if name not in grads:
            raise ShapeError(f"missing gradient for parameter {name}")
        grad = grads[name]
        if grad.shape != value.shape:
            raise ShapeError(f"gradient for {name} has shape {grad.shape}, parameter has {value.shape}")
        if not np.all(np.isfinite(grad)):
            raise NonFiniteGradientError(f"non-finite gradient for parameter {name}", parameter=name)
        if name in state.m and state.m[name].shape != value.shape:
            raise ShapeError(f"optimizer moments for {name} have shape {state.m[name].shape}")

    state.t += 1
    bias1 = 1.0 - state.beta1 ** state.t
    bias2 = 1.0 - state.beta2 ** state.t

    for name, value in params.items():
        g = grads[name]
        if name not in state.m:
            state.m[name] = np.zeros_like(value)
            state.v[name] = np.zeros_like(value)

        # Update biased first moment estimate
        state.m[name] = state.beta1 * state.m[name] + (1.0 - state.beta1) * g
        # Update biased second raw moment estimate
        state.v[name] = state.beta2 * state.v[name] + (1.0 - state.beta2) * (g * g)

        m_hat = state.m[name] / bias1
        v_hat = state.v[name] / bias2
        value -= state.lr * m_hat / (np.sqrt(v_hat) + state.epsilon)

    return state


class AdamOptimizer:
    """Stateful wrapper around adam_step that keeps a per-step history"""

    def __init__(self, params: Mapping[str, np.ndarray], lr: float = 1e-3, beta1: float = 0.9,
                 beta2: float = 0.999, epsilon: float = 1e-8):
        self.name = "ADAM"
        self.params = params
        self.state = AdamState.for_params(params, lr=lr, beta1=beta1, beta2=beta2, epsilon=epsilon)
        self.history: List[Dict[str, Any]] = []

    def step(self, grads: Mapping[str, np.ndarray], loss: float = None):
        adam_step(self.params, grads, self.state)
        self._callback(grads, loss)

    def _callback(self, grads: Mapping[str, np.ndarray], loss: float = None):
        """Track optimization progress"""
        grad_norm = float(np.sqrt(sum(float(np.sum(g * g)) for g in grads.values())))
        self.history.append({"step": self.state.t, "loss": loss, "grad_norm": grad_norm})
        logger.debug(f"{self.name} step {self.state.t}: loss={loss} grad_norm={grad_norm:.3e}")
