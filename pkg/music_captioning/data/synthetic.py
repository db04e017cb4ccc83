"""
Synthetic captioning datasets for desk-scale experiments.

Every playlist gets a distinct caption drawn from the vocabulary. Each
(position, token) pair of the caption adds a fixed pseudo-random offset to the
audio features and a fixed pattern to the spectrograms of the playlist's
tracks, so captions are recoverable from the inputs.

Word vectors share one common direction. A prediction near the vocabulary
mean then scores better on an unseen caption than a wrong word does, so
memorizing the training captions raises the held-out loss.
"""
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Sequence, Union

import numpy as np

from ..config import RunConfig, build_run_config
from ..embeddings import EOS_TOKEN, serialize_matrix_text
from ..embeddings.text_format import serialize_embedding_rows
from ..errors import ConfigError, DataError
from .manifest import Manifest, PlaylistEntry, TrackEntry, write_manifest

logger = logging.getLogger(__name__)

DEFAULT_VOCAB = (
    "mellow", "upbeat", "acoustic", "electronic", "jazz", "piano", "guitar", "night",
    "summer", "dance", "calm", "energetic", "vocal", "instrumental", "classic", "indie",
)

EMBEDDINGS_FILE = "embeddings.txt"
MANIFEST_FILE = "manifest.json"
CONFIG_FILE = "config.json"


@dataclass
class SyntheticDataset:
    """Container for a generated dataset and the files written for it"""
    manifest: Manifest
    root: Path
    captions: Dict[str, List[str]] = field(default_factory=dict)

    @property
    def embeddings_path(self) -> Path:
        return self.root / EMBEDDINGS_FILE

    @property
    def manifest_path(self) -> Path:
        return self.root / MANIFEST_FILE

    @property
    def config_path(self) -> Path:
        return self.root / CONFIG_FILE


def _check_vocab(vocab: Sequence[str]) -> List[str]:
    vocab = list(vocab)
    if not vocab:
        raise ConfigError("synthetic vocabulary must not be empty")
    if len(set(vocab)) != len(vocab):
        raise ConfigError("synthetic vocabulary contains duplicate words")
    for word in vocab:
        if not word or not word.isalnum() or word != word.lower() or word == EOS_TOKEN:
            raise ConfigError(f"synthetic vocabulary word '{word}' must be lowercase alphanumeric")
    return vocab


def _distinct_captions(rng: np.random.Generator, vocab_size: int, count: int, length: int) -> List[List[int]]:
    available = math.perm(vocab_size, length)
    if available < count:
        raise ConfigError(f"{vocab_size} words allow only {available} distinct captions of length {length}, "
                          f"{count} requested")
    captions: List[List[int]] = []
    seen = set()
    while len(captions) < count:
        caption = tuple(int(i) for i in rng.choice(vocab_size, size=length, replace=False))
        if caption not in seen:
            seen.add(caption)
            captions.append(list(caption))
    return captions


def synthetic_run_config(audio_dim: int, word_dim: int, bands: int, num_labels: int,
                         caption_len: int) -> RunConfig:
    """Small run configuration matching a generated dataset; paths are relative to the dataset directory"""
    return build_run_config({
        "dims": {"audio_dim": audio_dim, "word_dim": word_dim, "hidden_size": 32,
                 "num_labels": num_labels, "bands": bands},
        "optimizer": {"lr": 0.01},
        "training": {"epochs": 300, "patience": None, "max_caption_len": caption_len + 2},
        "paths": {"embeddings": EMBEDDINGS_FILE, "manifest": MANIFEST_FILE, "checkpoint_out": "checkpoint.mcap"},
    })


def _write(path: Path, data: bytes):
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(data)
    except OSError as e:
        raise DataError(f"Cannot write {path}: {e}", path=str(path)) from e


def synthesize(seed: int, num_playlists: int, tracks_per_playlist: int, out_dir: Union[str, Path],
               vocab: Sequence[str] = DEFAULT_VOCAB, audio_dim: int = 8, word_dim: int = 16,
               bands: int = 8, frames: int = 8, num_labels: int = 4, caption_len: int = 3,
               noise: float = 0.05) -> SyntheticDataset:
    """
    Generate a dataset and write it under out_dir.

    Files: embeddings.txt, manifest.json, config.json, features/<playlist>-<track>.txt (1 x D_a)
    and spectrograms/<playlist>-<track>.txt (F x T). Output is byte-identical for identical arguments.
    """
    vocab = _check_vocab(vocab)
    for name, value, minimum in (("num_playlists", num_playlists, 1), ("tracks_per_playlist", tracks_per_playlist, 1),
                                 ("audio_dim", audio_dim, 1), ("word_dim", word_dim, 1),
                                 ("bands", bands, 4), ("frames", frames, 4), ("num_labels", num_labels, 1),
                                 ("caption_len", caption_len, 1)):
        if value < minimum:
            raise ConfigError(f"{name} must be at least {minimum}, got {value}", field=name)
    if caption_len > len(vocab):
        raise ConfigError(f"caption_len {caption_len} exceeds the vocabulary size {len(vocab)}", field="caption_len")

    root = Path(out_dir)
    rng = np.random.default_rng(seed)
    embeddings = rng.standard_normal((len(vocab), word_dim))
    # shared direction carrying half of each word's expected energy: pairwise cosines sit near 1/2
    common = rng.standard_normal(word_dim)
    embeddings += math.sqrt(word_dim) * common / np.linalg.norm(common)
    audio_offsets = rng.standard_normal((caption_len, len(vocab), audio_dim))
    patterns = rng.standard_normal((caption_len, len(vocab), bands, frames))
    captions = _distinct_captions(rng, len(vocab), num_playlists, caption_len)

    _write(root / EMBEDDINGS_FILE, serialize_embedding_rows(vocab, embeddings))

    playlists = []
    dataset = SyntheticDataset(manifest=Manifest(), root=root)
    for i, caption in enumerate(captions):
        playlist_id = f"pl{i:03d}"
        audio_base = sum(audio_offsets[pos, tok] for pos, tok in enumerate(caption))
        spectrogram_base = sum(patterns[pos, tok] for pos, tok in enumerate(caption))
        labels = [1.0 if any(tok % num_labels == label for tok in caption) else 0.0 for label in range(num_labels)]
        words = [vocab[tok] for tok in caption]

        tracks = []
        for j in range(tracks_per_playlist):
            track_id = f"t{j:02d}"
            stem = f"{playlist_id}-{track_id}.txt"
            audio = audio_base + noise * rng.standard_normal(audio_dim)
            spectrogram = spectrogram_base + noise * rng.standard_normal((bands, frames))
            hints = [words[k] for k in rng.permutation(caption_len)[:2]]
            _write(root / "features" / stem, serialize_matrix_text(audio[np.newaxis, :]))
            _write(root / "spectrograms" / stem, serialize_matrix_text(spectrogram))
            tracks.append(TrackEntry(
                id=track_id,
                metadata=" ".join([f"track {j + 1}"] + hints),
                audio_feature_path=f"features/{stem}",
                spectrogram_path=f"spectrograms/{stem}",
                labels=labels,
            ))
        playlists.append(PlaylistEntry(id=playlist_id, description=" ".join(words), tracks=tracks))
        dataset.captions[playlist_id] = words

    dataset.manifest = Manifest(playlists=playlists)
    write_manifest(dataset.manifest, root / MANIFEST_FILE)
    config = synthetic_run_config(audio_dim, word_dim, bands, num_labels, caption_len)
    _write(root / CONFIG_FILE, (config.to_json() + "\n").encode("utf-8"))

    logger.info(f"Synthesized {num_playlists} playlists x {tracks_per_playlist} tracks under {root}")
    return dataset
