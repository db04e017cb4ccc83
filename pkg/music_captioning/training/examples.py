"""
Turn a loaded manifest into training examples for either track-feature path.
"""
import logging
from dataclasses import dataclass
from typing import List, Optional, Union

import numpy as np

from ..config import RunConfig, TrainingMode
from ..data import LoadedManifest
from ..embeddings import EmbeddingTable
from ..errors import DataError, MissingModalityError
from ..features import PlaylistTarget, build_playlist_target, build_track_feature, tokenize
from ..fully_train import RawTrack

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PretrainExample:
    """Precomputed track features (N x (D_a + D_w)) with the caption target"""
    playlist_id: str
    target: Optional[PlaylistTarget]
    tracks: np.ndarray


@dataclass(frozen=True)
class FullyTrainExample:
    """Raw per-track inputs with the caption target"""
    playlist_id: str
    target: Optional[PlaylistTarget]
    tracks: List[RawTrack]


Example = Union[PretrainExample, FullyTrainExample]


def _target(description: str, table: EmbeddingTable, config: RunConfig) -> PlaylistTarget:
    return build_playlist_target(description, table, config.training.max_caption_len)


def build_pretrain_examples(loaded: LoadedManifest, table: EmbeddingTable, config: RunConfig,
                            with_targets: bool = True) -> List[PretrainExample]:
    examples = []
    for playlist in loaded.manifest.playlists:
        target = _target(playlist.description, table, config) if with_targets else None
        rows = []
        for track in playlist.tracks:
            audio = loaded.audio_features.get((playlist.id, track.id))
            if audio is None:
                raise MissingModalityError(f"playlist '{playlist.id}' track '{track.id}' has no audio features",
                                           playlist_id=playlist.id, track_id=track.id)
            if audio.shape[0] != config.dims.audio_dim:
                raise DataError(f"playlist '{playlist.id}' track '{track.id}': audio feature has {audio.shape[0]} "
                                f"values, configuration expects {config.dims.audio_dim}")
            rows.append(build_track_feature(audio, track.metadata, table, config.dims.audio_dim).combined)
        examples.append(PretrainExample(playlist.id, target, np.stack(rows)))
    return examples


def _metadata_embeddings(text: str, table: EmbeddingTable) -> np.ndarray:
    rows = [row for row in (table.index_of(t) for t in tokenize(text)) if row is not None]
    if not rows:
        logger.warning(f"Track metadata has no in-vocabulary words: '{text[:60]}'")
    return table.matrix[rows].copy() if rows else np.zeros((0, table.dim))


def build_fully_train_examples(loaded: LoadedManifest, table: EmbeddingTable, config: RunConfig,
                               with_targets: bool = True) -> List[FullyTrainExample]:
    dims = config.dims
    examples = []
    for playlist in loaded.manifest.playlists:
        target = _target(playlist.description, table, config) if with_targets else None
        tracks = []
        for track in playlist.tracks:
            spectrogram = loaded.spectrograms.get((playlist.id, track.id))
            if spectrogram is None:
                raise MissingModalityError(f"playlist '{playlist.id}' track '{track.id}' has no spectrogram",
                                           playlist_id=playlist.id, track_id=track.id)
            if spectrogram.shape[0] != dims.bands:
                raise DataError(f"playlist '{playlist.id}' track '{track.id}': spectrogram has "
                                 f"{spectrogram.shape[0]} bands, configuration expects {dims.bands}")
            labels = None
            if track.labels is not None:
                if len(track.labels) != dims.num_labels:
                    raise DataError(f"playlist '{playlist.id}' track '{track.id}' has {len(track.labels)} labels, "
                                    f"configuration expects {dims.num_labels}",
                                    playlist_id=playlist.id, track_id=track.id)
                labels = np.asarray(track.labels, dtype=np.float64)
            tracks.append(RawTrack(spectrogram, _metadata_embeddings(track.metadata, table), labels))
        examples.append(FullyTrainExample(playlist.id, target, tracks))
    return examples


def build_examples(loaded: LoadedManifest, table: EmbeddingTable, config: RunConfig,
                   with_targets: bool = True) -> List[Example]:
    """Examples for the configured mode; without targets only the track inputs are built (captioning)"""
    if config.mode is TrainingMode.FULLY_TRAIN:
        return build_fully_train_examples(loaded, table, config, with_targets)
    return build_pretrain_examples(loaded, table, config, with_targets)
