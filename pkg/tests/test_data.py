import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from music_captioning.config import TrainingMode
from music_captioning.data import (
    Manifest,
    PlaylistEntry,
    TrackEntry,
    load_manifest,
    parse_manifest,
    split,
    synthesize,
    validation_size,
    write_manifest,
)
from music_captioning.embeddings import load_embeddings, serialize_matrix_text
from music_captioning.errors import (
    ConfigError,
    DanglingReferenceError,
    DataError,
    ManifestError,
    MatrixFormatError,
    MissingModalityError,
    UnknownPlaylistError,
)


def write_json(path, payload):
    path.write_text(json.dumps(payload), encoding="utf-8")
    return path


@pytest.fixture
def minimal_manifest(tmp_path):
    (tmp_path / "a.txt").write_bytes(serialize_matrix_text(np.array([[1.0, 2.0]])))
    return write_json(tmp_path / "manifest.json", {
        "playlists": [{"id": "p1", "description": "cat dog",
                       "tracks": [{"id": "t1", "metadata": "cat", "audio_feature_path": "a.txt"}]}],
    })


def many_playlists(count: int) -> Manifest:
    return Manifest(playlists=[
        PlaylistEntry(id=f"p{i}", description="cat", tracks=[TrackEntry(id="t")]) for i in range(count)
    ])


class TestManifest:
    def test_minimal_document(self, minimal_manifest):
        loaded = load_manifest(minimal_manifest)
        assert loaded.manifest.playlist_ids == ["p1"]
        assert len(loaded.manifest.playlist("p1").tracks) == 1
        np.testing.assert_array_equal(loaded.audio_features[("p1", "t1")], [1.0, 2.0])

    def test_missing_description_names_playlist(self):
        with pytest.raises(ManifestError) as excinfo:
            parse_manifest({"playlists": [{"id": "mix-7", "tracks": [{"id": "t"}]}]})
        assert "mix-7" in str(excinfo.value)
        assert excinfo.value.field == "playlists.0.description"

    @pytest.mark.parametrize("raw", [
        {"playlists": [{"id": "p", "description": "  ", "tracks": [{"id": "t"}]}]},
        {"playlists": [{"id": "p", "description": "x", "tracks": []}]},
        {"playlists": [{"id": "p", "description": "x", "tracks": [{"id": "t"}, {"id": "t"}]}]},
        {"playlists": [{"id": "p", "description": "x", "tracks": [{"id": "t"}]},
                       {"id": "p", "description": "y", "tracks": [{"id": "t"}]}]},
        {"playlists": [{"id": "p", "description": "x", "tracks": [{"id": "t", "labels": [1.5]}]}]},
        {"playlists": [{"id": "p", "description": "x", "tracks": [{"id": "t", "bpm": 120}]}]},
        {"playlists": "nope"},
    ])
    def test_schema_violations(self, raw):
        with pytest.raises(ManifestError):
            parse_manifest(raw)

    def test_dangling_reference(self, tmp_path):
        path = write_json(tmp_path / "manifest.json", {
            "playlists": [{"id": "p", "description": "x",
                           "tracks": [{"id": "t", "audio_feature_path": "features/none.txt"}]}],
        })
        with pytest.raises(DanglingReferenceError) as excinfo:
            load_manifest(path)
        assert "none.txt" in str(excinfo.value)

    def test_missing_modality(self, minimal_manifest):
        with pytest.raises(MissingModalityError):
            load_manifest(minimal_manifest, require=TrainingMode.FULLY_TRAIN)
        load_manifest(minimal_manifest, require=TrainingMode.PRETRAIN_FEATURES)

    def test_audio_file_must_hold_one_row(self, tmp_path):
        (tmp_path / "a.txt").write_bytes(serialize_matrix_text(np.ones((2, 3))))
        path = write_json(tmp_path / "manifest.json", {
            "playlists": [{"id": "p", "description": "x", "tracks": [{"id": "t", "audio_feature_path": "a.txt"}]}],
        })
        with pytest.raises(DataError):
            load_manifest(path)

    def test_corrupt_sidecar(self, tmp_path):
        (tmp_path / "s.txt").write_bytes(b"2 2\n1 2\n")
        path = write_json(tmp_path / "manifest.json", {
            "playlists": [{"id": "p", "description": "x", "tracks": [{"id": "t", "spectrogram_path": "s.txt"}]}],
        })
        with pytest.raises(MatrixFormatError):
            load_manifest(path)

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "manifest.json"
        path.write_text("{", encoding="utf-8")
        with pytest.raises(ManifestError):
            load_manifest(path)

    def test_write_then_load_is_identity(self, tmp_path, minimal_manifest):
        original = load_manifest(minimal_manifest).manifest
        copy = tmp_path / "copy.json"
        write_manifest(original, copy)
        assert load_manifest(copy).manifest == original

    def test_unknown_playlist(self):
        with pytest.raises(UnknownPlaylistError) as excinfo:
            many_playlists(2).subset(["p9"])
        assert excinfo.value.playlist_id == "p9"


class TestSplit:
    def test_ten_playlists(self):
        train, validation = split(many_playlists(10), 0.2, seed=1)
        assert len(train.playlists) == 8
        assert len(validation.playlists) == 2
        again = split(many_playlists(10), 0.2, seed=1)
        assert again[0].playlist_ids == train.playlist_ids
        assert again[1].playlist_ids == validation.playlist_ids

    @pytest.mark.parametrize("count, fraction, expected", [
        (10, 0.2, 2), (4, 0.2, 1), (2, 0.9, 1), (5, 0.5, 3), (3, 0.01, 1), (20, 0.25, 5),
    ])
    def test_validation_size(self, count, fraction, expected):
        assert validation_size(count, fraction) == expected

    @settings(max_examples=100)
    @given(st.integers(min_value=2, max_value=30), st.floats(min_value=0.01, max_value=0.99),
           st.integers(min_value=0, max_value=2 ** 64 - 1))
    def test_split_is_a_partition(self, count, fraction, seed):
        manifest = many_playlists(count)
        train, validation = split(manifest, fraction, seed)
        ids = train.playlist_ids + validation.playlist_ids
        assert sorted(ids) == sorted(manifest.playlist_ids)
        assert not set(train.playlist_ids) & set(validation.playlist_ids)
        assert train.playlists and validation.playlists
        order = manifest.playlist_ids
        assert train.playlist_ids == [i for i in order if i in set(train.playlist_ids)]

    def test_rejects_tiny_manifest(self):
        with pytest.raises(DataError):
            split(many_playlists(1), 0.2, seed=0)

    @pytest.mark.parametrize("fraction", [0.0, 1.0, 1.5, -0.1])
    def test_rejects_fraction_out_of_range(self, fraction):
        with pytest.raises(ConfigError):
            split(many_playlists(4), fraction, seed=0)


class TestSynthesize:
    def test_files_are_deterministic(self, tmp_path):
        first = synthesize(42, 4, 3, tmp_path / "a")
        second = synthesize(42, 4, 3, tmp_path / "b")
        files = sorted(p.relative_to(first.root) for p in first.root.rglob("*") if p.is_file())
        assert files == sorted(p.relative_to(second.root) for p in second.root.rglob("*") if p.is_file())
        for relative in files:
            assert (first.root / relative).read_bytes() == (second.root / relative).read_bytes()

    def test_other_seed_differs(self, tmp_path):
        first = synthesize(42, 4, 3, tmp_path / "a")
        second = synthesize(43, 4, 3, tmp_path / "b")
        assert first.embeddings_path.read_bytes() != second.embeddings_path.read_bytes()

    def test_generated_manifest_loads(self, synthetic_dataset):
        loaded = load_manifest(synthetic_dataset.manifest_path, require=TrainingMode.FULLY_TRAIN)
        assert loaded.manifest.playlist_ids == ["pl000", "pl001", "pl002", "pl003"]
        assert loaded.manifest == synthetic_dataset.manifest
        assert len(loaded.spectrograms) == 12 and len(loaded.audio_features) == 12
        assert loaded.spectrograms[("pl000", "t00")].shape == (8, 8)

    def test_captions_are_distinct_and_in_vocabulary(self, synthetic_dataset):
        table = load_embeddings(synthetic_dataset.embeddings_path)
        captions = [tuple(words) for words in synthetic_dataset.captions.values()]
        assert len(set(captions)) == len(captions)
        for playlist in synthetic_dataset.manifest.playlists:
            words = synthetic_dataset.captions[playlist.id]
            assert playlist.description == " ".join(words)
            assert all(word in table for word in words)
            for track in playlist.tracks:
                assert len(track.labels) == 4

    def test_word_vectors_share_a_direction(self, synthetic_dataset):
        table = load_embeddings(synthetic_dataset.embeddings_path, add_eos=False)
        unit = table.matrix / np.linalg.norm(table.matrix, axis=1, keepdims=True)
        cosines = (unit @ unit.T)[np.triu_indices(table.vocab_size, k=1)]
        assert 0.25 < cosines.mean() < 0.75

    def test_config_matches_dataset(self, synthetic_dataset):
        config = json.loads(synthetic_dataset.config_path.read_text(encoding="utf-8"))
        assert config["dims"]["audio_dim"] == 8
        assert config["dims"]["word_dim"] == 16
        assert config["paths"]["manifest"] == "manifest.json"

    @pytest.mark.parametrize("kwargs", [
        {"vocab": []},
        {"vocab": ["a", "a"]},
        {"num_playlists": 0},
        {"caption_len": 17},
        {"bands": 3},
        {"vocab": ["ab", "cd"], "caption_len": 2, "num_playlists": 3},
    ])
    def test_invalid_sizes(self, tmp_path, kwargs):
        arguments = {"seed": 0, "num_playlists": 2, "tracks_per_playlist": 1, "out_dir": tmp_path}
        arguments.update(kwargs)
        with pytest.raises(ConfigError):
            synthesize(**arguments)
