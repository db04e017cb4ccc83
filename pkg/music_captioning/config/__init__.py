"""
Configuration package initialization.
Provides easy imports for environment settings and run configuration.
"""

from .settings import (
    Settings,
    get_settings,
    reset_settings
)
from .run_config import (
    TrainingMode,
    DimsConfig,
    OptimizerConfig,
    TrainingConfig,
    PathsConfig,
    RunConfig,
    build_run_config,
    load_run_config
)

__all__ = [
    "Settings",
    "get_settings",
    "reset_settings",
    "TrainingMode",
    "DimsConfig",
    "OptimizerConfig",
    "TrainingConfig",
    "PathsConfig",
    "RunConfig",
    "build_run_config",
    "load_run_config"
]
