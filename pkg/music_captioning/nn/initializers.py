"""
Seeded parameter initialization.
"""
import numpy as np


def glorot_uniform(rng: np.random.Generator, shape, fan_in: int, fan_out: int) -> np.ndarray:
    """Uniform on [-sqrt(6/(fan_in+fan_out)), +sqrt(6/(fan_in+fan_out))]"""
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


def component_rng(seed: int, component: str) -> np.random.Generator:
    """
    Independent generator per model component.

    Streams are keyed by (seed, component name) so building a model with or
    without an optional component leaves every other component's draws unchanged.
    """
    key = [int(b) for b in component.encode("utf-8")]
    return np.random.default_rng([seed, *key])
