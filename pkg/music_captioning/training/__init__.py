"""
Training: examples, objectives, the fit loop and checkpoint round trips.
"""
from .examples import (
    PretrainExample,
    FullyTrainExample,
    Example,
    build_pretrain_examples,
    build_fully_train_examples,
    build_examples
)
from .objectives import (
    CaptionObjective,
    PretrainObjective,
    FullyTrainObjective,
    RestoredObjective,
    build_objective,
    checkpoint_config,
    save_objective,
    load_objective
)
from .trainer import EpochRecord, TrainingReport, fit, fit_pretrain, fit_fully

__all__ = [
    'PretrainExample',
    'FullyTrainExample',
    'Example',
    'build_pretrain_examples',
    'build_fully_train_examples',
    'build_examples',
    'CaptionObjective',
    'PretrainObjective',
    'FullyTrainObjective',
    'RestoredObjective',
    'build_objective',
    'checkpoint_config',
    'save_objective',
    'load_objective',
    'EpochRecord',
    'TrainingReport',
    'fit',
    'fit_pretrain',
    'fit_fully'
]
