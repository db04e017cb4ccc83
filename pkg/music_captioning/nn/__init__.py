"""
Minimal float64 neural-network core with hand-derived gradients.
"""
from .initializers import glorot_uniform, component_rng
from .gru import GRU_PARAM_NAMES, GruCellParams, GruCache, gru_cell_forward, gru_cell_backward
from .dense import dense_forward, dense_backward
from .losses import (
    COSINE_EPS,
    BCE_CLAMP,
    cosine_proximity_loss,
    sequence_cosine_loss,
    binary_cross_entropy
)
from .optimizers import AdamState, AdamOptimizer, adam_step
from .gradient_check import FD_STEP, GradientCheckReport, gradient_check, numerical_gradients
from .conv import (
    conv3x3_forward,
    conv3x3_backward,
    relu_forward,
    relu_backward,
    max_pool2x2_forward,
    max_pool2x2_backward,
    global_average_pool_forward,
    global_average_pool_backward
)

__all__ = [
    'glorot_uniform',
    'component_rng',
    'GRU_PARAM_NAMES',
    'GruCellParams',
    'GruCache',
    'gru_cell_forward',
    'gru_cell_backward',
    'dense_forward',
    'dense_backward',
    'COSINE_EPS',
    'BCE_CLAMP',
    'cosine_proximity_loss',
    'sequence_cosine_loss',
    'binary_cross_entropy',
    'AdamState',
    'AdamOptimizer',
    'adam_step',
    'FD_STEP',
    'GradientCheckReport',
    'gradient_check',
    'numerical_gradients',
    'conv3x3_forward',
    'conv3x3_backward',
    'relu_forward',
    'relu_backward',
    'max_pool2x2_forward',
    'max_pool2x2_backward',
    'global_average_pool_forward',
    'global_average_pool_backward'
]
