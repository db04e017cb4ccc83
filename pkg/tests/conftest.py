"""
Shared fixtures: tiny embedding tables, synthetic datasets and small run configurations.
"""
import numpy as np
import pytest

from music_captioning.config import RunConfig, build_run_config, reset_settings
from music_captioning.data import synthesize
from music_captioning.embeddings import EmbeddingTable


@pytest.fixture(autouse=True)
def fresh_settings():
    reset_settings()
    yield
    reset_settings()


@pytest.fixture
def cat_dog_table() -> EmbeddingTable:
    return EmbeddingTable(["cat", "dog"], np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]))


@pytest.fixture
def word_table() -> EmbeddingTable:
    """Six words with distinct random directions plus <eos>"""
    rng = np.random.default_rng(3)
    words = ["cat", "dog", "sun", "rain", "jazz", "rock"]
    return EmbeddingTable(words, rng.standard_normal((len(words), 4))).with_eos()


@pytest.fixture
def synthetic_dataset(tmp_path):
    return synthesize(seed=42, num_playlists=4, tracks_per_playlist=3, out_dir=tmp_path / "synth")


def tiny_config(**sections) -> RunConfig:
    """Small dimensions for fast unit runs; sections override nested keys"""
    raw = {
        "dims": {"audio_dim": 3, "word_dim": 4, "hidden_size": 3, "num_labels": 2, "bands": 6},
        "optimizer": {"lr": 0.01},
        "training": {"epochs": 5, "patience": None, "max_caption_len": 4},
    }
    for section, values in sections.items():
        if isinstance(values, dict):
            raw.setdefault(section, {}).update(values)
        else:
            raw[section] = values
    return build_run_config(raw)
