"""
Dataset manifest: playlists with descriptions and ordered tracks pointing at feature sidecar files.
Relative sidecar paths resolve against the manifest's directory.
"""
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from ..config import TrainingMode
from ..embeddings import parse_matrix_text
from ..errors import (
    DanglingReferenceError,
    DataError,
    ManifestError,
    MissingModalityError,
    UnknownPlaylistError,
)

logger = logging.getLogger(__name__)

TrackKey = Tuple[str, str]


class TrackEntry(BaseModel):
    model_config = ConfigDict(extra="forbid")

    id: str = Field(min_length=1)
    metadata: str = ""
    audio_feature_path: Optional[str] = None
    spectrogram_path: Optional[str] = None
    labels: Optional[List[float]] = None

    @field_validator("labels")
    @classmethod
    def labels_in_unit_interval(cls, labels):
        if labels is not None and any(not 0.0 <= value <= 1.0 for value in labels):
            raise ValueError("label values must lie in [0, 1]")
        return labels


class PlaylistEntry(BaseModel):
    model_config = ConfigDict(extra="forbid")

    id: str = Field(min_length=1)
    description: str
    tracks: List[TrackEntry] = Field(min_length=1)

    @field_validator("description")
    @classmethod
    def description_not_blank(cls, description: str) -> str:
        if not description.strip():
            raise ValueError("description must not be empty")
        return description

    @model_validator(mode="after")
    def unique_track_ids(self):
        seen = set()
        for track in self.tracks:
            if track.id in seen:
                raise ValueError(f"duplicate track id '{track.id}'")
            seen.add(track.id)
        return self


class Manifest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    playlists: List[PlaylistEntry] = Field(default_factory=list)

    @model_validator(mode="after")
    def unique_playlist_ids(self):
        seen = set()
        for playlist in self.playlists:
            if playlist.id in seen:
                raise ValueError(f"duplicate playlist id '{playlist.id}'")
            seen.add(playlist.id)
        return self

    @property
    def playlist_ids(self) -> List[str]:
        return [p.id for p in self.playlists]

    def playlist(self, playlist_id: str) -> PlaylistEntry:
        for playlist in self.playlists:
            if playlist.id == playlist_id:
                return playlist
        raise UnknownPlaylistError(playlist_id)

    def subset(self, playlist_ids: Iterable[str]) -> "Manifest":
        """Playlists with the given ids, in manifest order"""
        wanted = set(playlist_ids)
        for playlist_id in wanted:
            self.playlist(playlist_id)
        return Manifest(playlists=[p for p in self.playlists if p.id in wanted])


@dataclass
class LoadedManifest:
    """Validated manifest plus parsed sidecar payloads keyed by (playlist id, track id)"""
    manifest: Manifest
    root: Path
    audio_features: Dict[TrackKey, np.ndarray] = field(default_factory=dict)
    spectrograms: Dict[TrackKey, np.ndarray] = field(default_factory=dict)

    def subset(self, manifest: Manifest) -> "LoadedManifest":
        keys = {(p.id, t.id) for p in manifest.playlists for t in p.tracks}
        return LoadedManifest(
            manifest=manifest,
            root=self.root,
            audio_features={k: v for k, v in self.audio_features.items() if k in keys},
            spectrograms={k: v for k, v in self.spectrograms.items() if k in keys},
        )


def _describe_location(raw: Any, loc: Tuple[Any, ...]) -> Tuple[str, Optional[str]]:
    """Dotted field path and, when the error sits inside a playlist, that playlist's id"""
    path = ".".join(str(part) for part in loc)
    playlist_id = None
    if len(loc) >= 2 and loc[0] == "playlists" and isinstance(loc[1], int):
        try:
            candidate = raw["playlists"][loc[1]].get("id")
            playlist_id = candidate if isinstance(candidate, str) else None
        except (KeyError, IndexError, TypeError, AttributeError):
            playlist_id = None
    return path, playlist_id


def parse_manifest(raw: Any) -> Manifest:
    try:
        return Manifest.model_validate(raw)
    except ValidationError as e:
        first = e.errors()[0]
        path, playlist_id = _describe_location(raw, tuple(first["loc"]))
        where = f"playlist '{playlist_id}': " if playlist_id else ""
        raise ManifestError(f"{where}{path or '<root>'}: {first['msg']}", field=path,
                            playlist_id=playlist_id) from e


def _load_matrix(root: Path, relative: str, name: str) -> np.ndarray:
    path = root / relative
    try:
        with open(path, "rb") as f:
            return parse_matrix_text(f, name=str(path))
    except FileNotFoundError as e:
        raise DanglingReferenceError(f"{name} points to a missing file: {path}", path=str(path)) from e
    except IsADirectoryError as e:
        raise DanglingReferenceError(f"{name} points to a directory: {path}", path=str(path)) from e


def load_manifest(path: Union[str, Path], require: Optional[TrainingMode] = None) -> LoadedManifest:
    """
    Load, validate and resolve a manifest.

    Args:
        path: manifest JSON file
        require: training path whose modality every track must provide
            (audio_feature_path for pretrain-features, spectrogram_path for fully-train)

    Returns:
        LoadedManifest with every referenced sidecar parsed
    """
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError as e:
        raise DataError(f"Manifest not found: {path}", path=str(path)) from e
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise ManifestError(f"Manifest {path} is not valid JSON: {e}", path=str(path)) from e

    manifest = parse_manifest(raw)
    loaded = LoadedManifest(manifest=manifest, root=path.parent)

    for playlist in manifest.playlists:
        for index, track in enumerate(playlist.tracks):
            key = (playlist.id, track.id)
            field_path = f"playlists[{playlist.id}].tracks[{index}]"
            if require is TrainingMode.PRETRAIN_FEATURES and track.audio_feature_path is None:
                raise MissingModalityError(f"{field_path}: track '{track.id}' has no audio_feature_path",
                                           playlist_id=playlist.id, track_id=track.id)
            if require is TrainingMode.FULLY_TRAIN and track.spectrogram_path is None:
                raise MissingModalityError(f"{field_path}: track '{track.id}' has no spectrogram_path",
                                           playlist_id=playlist.id, track_id=track.id)

            if track.audio_feature_path is not None:
                matrix = _load_matrix(loaded.root, track.audio_feature_path, f"{field_path}.audio_feature_path")
                if matrix.shape[0] != 1:
                    raise DataError(f"{field_path}: audio feature file must hold a single row, "
                                    f"got {matrix.shape[0]}", playlist_id=playlist.id, track_id=track.id)
                loaded.audio_features[key] = matrix[0]
            if track.spectrogram_path is not None:
                loaded.spectrograms[key] = _load_matrix(loaded.root, track.spectrogram_path,
                                                        f"{field_path}.spectrogram_path")

    logger.info(f"Loaded manifest {path}: {len(manifest.playlists)} playlists, "
                f"{sum(len(p.tracks) for p in manifest.playlists)} tracks")
    return loaded


def write_manifest(manifest: Manifest, path: Union[str, Path]):
    path = Path(path)
    text = json.dumps(manifest.model_dump(exclude_none=True), indent=2, ensure_ascii=False) + "\n"
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    except OSError as e:
        raise DataError(f"Cannot write manifest to {path}: {e}", path=str(path)) from e
