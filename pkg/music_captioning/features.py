"""
Track input features and playlist target sequences.

A track feature is [audio summary ; mean metadata word embedding], audio first.
A playlist target is the sequence of description word embeddings closed by <eos>.
"""
import logging
import re
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from .embeddings import EOS_TOKEN, EmbeddingTable, bag_embedding
from .errors import NumericalError, ShapeError, UnusableSupervisionError

logger = logging.getLogger(__name__)

_TOKEN_RE = re.compile(r"\w+")


@dataclass(frozen=True)
class TrackFeature:
    audio: np.ndarray
    words: np.ndarray
    combined: np.ndarray
    no_known_words: bool = False

    def split(self) -> Tuple[np.ndarray, np.ndarray]:
        """Recover (audio, words) from the combined vector"""
        cut = self.audio.shape[0]
        return self.combined[:cut], self.combined[cut:]


@dataclass(frozen=True)
class PlaylistTarget:
    tokens: List[str]
    embeddings: np.ndarray
    dropped_count: int


def tokenize(text: str) -> List[str]:
    """Lowercase and split on every character that is not a letter, digit or underscore"""
    return _TOKEN_RE.findall(text.lower())


def build_track_feature(audio: np.ndarray, metadata_text: str, table: EmbeddingTable,
                        audio_dim: int = None) -> TrackFeature:
    audio = np.asarray(audio, dtype=np.float64)
    if audio.ndim != 1 or (audio_dim is not None and audio.shape[0] != audio_dim):
        raise ShapeError(f"audio feature has shape {audio.shape}, expected ({audio_dim},)")
    if not np.all(np.isfinite(audio)):
        raise NumericalError("audio feature contains non-finite values")

    bag = bag_embedding(table, tokenize(metadata_text))
    if bag.no_known_words:
        logger.warning(f"Track metadata has no in-vocabulary words: '{metadata_text[:60]}'")
    return TrackFeature(audio, bag.vector, np.concatenate([audio, bag.vector]), bag.no_known_words)


def build_playlist_target(description: str, table: EmbeddingTable, max_len: int) -> PlaylistTarget:
    """
    Tokenize a description, drop out-of-vocabulary tokens, truncate to max_len - 1
    and append <eos>. Rows of the returned matrix align with the returned tokens.
    """
    if max_len < 1:
        raise ShapeError(f"max_len must be at least 1, got {max_len}")
    eos_row = table.eos_row
    if eos_row is None:
        raise UnusableSupervisionError(f"embedding table has no {EOS_TOKEN} row")

    tokens = tokenize(description)
    known = [t for t in tokens if t in table]
    dropped = len(tokens) - len(known)
    if not known:
        raise UnusableSupervisionError(f"description has no in-vocabulary words: '{description[:60]}'",
                                       description=description)
    if dropped:
        logger.warning(f"Dropped {dropped} out-of-vocabulary description tokens")

    kept = known[:max_len - 1] + [EOS_TOKEN]
    rows = [table.index_of(t) for t in kept]
    return PlaylistTarget(kept, table.matrix[rows].copy(), dropped)
