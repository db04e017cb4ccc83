"""
Seeded train/validation split over playlists.
"""
import logging
import math
from typing import Tuple

import numpy as np

from ..errors import ConfigError, DataError
from .manifest import Manifest

logger = logging.getLogger(__name__)


def validation_size(num_playlists: int, fraction: float) -> int:
    """max(1, round-half-up(fraction * P)), capped so training keeps at least one playlist"""
    return min(num_playlists - 1, max(1, math.floor(fraction * num_playlists + 0.5)))


def split(manifest: Manifest, validation_fraction: float, seed: int) -> Tuple[Manifest, Manifest]:
    """
    Partition playlists into (train, validation).

    Playlist indices are shuffled with a generator seeded by `seed`; the first
    validation_size of the permutation form the validation side. Both sides keep
    manifest order.
    """
    if not 0.0 < validation_fraction < 1.0:
        raise ConfigError(f"validation fraction must lie in (0, 1), got {validation_fraction}",
                          field="training.validation_fraction")
    count = len(manifest.playlists)
    if count < 2:
        raise DataError(f"splitting needs at least 2 playlists, manifest has {count}")

    order = np.random.default_rng(seed).permutation(count)
    held_out = set(int(i) for i in order[:validation_size(count, validation_fraction)])
    train = Manifest(playlists=[p for i, p in enumerate(manifest.playlists) if i not in held_out])
    validation = Manifest(playlists=[p for i, p in enumerate(manifest.playlists) if i in held_out])
    logger.info(f"Split {count} playlists into {len(train.playlists)} train / {len(validation.playlists)} validation")
    return train, validation
