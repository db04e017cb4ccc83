"""
Dataset manifests, splitting and synthetic data generation.
"""
from .manifest import (
    TrackEntry,
    PlaylistEntry,
    Manifest,
    LoadedManifest,
    parse_manifest,
    load_manifest,
    write_manifest
)
from .splitting import validation_size, split
from .synthetic import (
    DEFAULT_VOCAB,
    SyntheticDataset,
    synthetic_run_config,
    synthesize
)

__all__ = [
    'TrackEntry',
    'PlaylistEntry',
    'Manifest',
    'LoadedManifest',
    'parse_manifest',
    'load_manifest',
    'write_manifest',
    'validation_size',
    'split',
    'DEFAULT_VOCAB',
    'SyntheticDataset',
    'synthetic_run_config',
    'synthesize'
]
