"""
Run configuration: one JSON file holding dimensions, optimizer, training and path settings.
Defaults follow the pre-training setup (50-dim audio tags, 300-dim word vectors, ADAM).
"""
import json
import logging
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from ..errors import ConfigError

logger = logging.getLogger(__name__)

MAX_SEED = 2 ** 64 - 1


class TrainingMode(str, Enum):
    """Which track-feature path the model is trained on"""
    PRETRAIN_FEATURES = "pretrain-features"
    FULLY_TRAIN = "fully-train"


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)


class DimsConfig(_Section):
    audio_dim: int = Field(50, ge=1, description="D_a, audio summary size")
    word_dim: int = Field(300, ge=1, description="D_w, must match the embeddings file")
    hidden_size: int = Field(256, ge=1, description="H, GRU hidden size of encoder and decoder")
    sentence_dim: Optional[int] = Field(None, ge=1, description="D_s, text summarizer size (defaults to D_w)")
    num_labels: int = Field(4, ge=1, description="L, auxiliary label count")
    bands: int = Field(48, ge=4, description="F, spectrogram frequency bins")

    @property
    def resolved_sentence_dim(self) -> int:
        return self.sentence_dim if self.sentence_dim is not None else self.word_dim


class OptimizerConfig(_Section):
    lr: float = Field(1e-3, gt=0)
    beta1: float = Field(0.9, gt=0, lt=1)
    beta2: float = Field(0.999, gt=0, lt=1)
    epsilon: float = Field(1e-8, gt=0)


class TrainingConfig(_Section):
    epochs: int = Field(100, ge=1)
    patience: Optional[int] = Field(10, ge=0, description="null disables early stopping")
    seed: int = Field(0, ge=0, le=MAX_SEED)
    validation_fraction: float = Field(0.2, gt=0, lt=1)
    max_caption_len: int = Field(16, ge=1)
    label_weight: float = Field(1.0, ge=0, alias="lambda")


class PathsConfig(_Section):
    embeddings: Optional[str] = None
    manifest: Optional[str] = None
    checkpoint_out: Optional[str] = None


class RunConfig(_Section):
    mode: TrainingMode = TrainingMode.PRETRAIN_FEATURES
    dims: DimsConfig = Field(default_factory=DimsConfig)
    optimizer: OptimizerConfig = Field(default_factory=OptimizerConfig)
    training: TrainingConfig = Field(default_factory=TrainingConfig)
    paths: PathsConfig = Field(default_factory=PathsConfig)

    def to_json(self) -> str:
        return self.model_dump_json(by_alias=True, indent=2)

    def to_dict(self) -> Dict[str, Any]:
        return self.model_dump(mode="json", by_alias=True)


def _merge(base: Dict[str, Any], overrides: Dict[str, Any]) -> Dict[str, Any]:
    merged = dict(base)
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def build_run_config(raw: Dict[str, Any], overrides: Optional[Dict[str, Any]] = None) -> RunConfig:
    """Validate a raw mapping (plus nested overrides) into a RunConfig"""
    data = _merge(raw, overrides or {})
    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        field = ".".join(str(part) for part in first["loc"])
        raise ConfigError(f"Invalid configuration at '{field}': {first['msg']}", field=field) from e


def load_run_config(path: Optional[Union[str, Path]] = None,
                    overrides: Optional[Dict[str, Any]] = None) -> RunConfig:
    """
    Load a RunConfig from a JSON file, applying command-line overrides.

    Relative paths inside the file are resolved against the file's directory.
    With no path, defaults plus overrides are used.
    """
    raw: Dict[str, Any] = {}
    if path is not None:
        config_path = Path(path)
        try:
            raw = json.loads(config_path.read_text(encoding="utf-8"))
        except FileNotFoundError as e:
            raise ConfigError(f"Config file not found: {config_path}", path=str(config_path)) from e
        except json.JSONDecodeError as e:
            raise ConfigError(f"Config file is not valid JSON: {config_path}: {e}", path=str(config_path)) from e
        if not isinstance(raw, dict):
            raise ConfigError(f"Config root must be an object: {config_path}", path=str(config_path))

        paths = raw.get("paths")
        if isinstance(paths, dict):
            base = config_path.parent
            raw["paths"] = {
                key: str(base / value) if isinstance(value, str) and not Path(value).is_absolute() else value
                for key, value in paths.items()
            }
        logger.debug(f"Loaded run config from {config_path}")

    return build_run_config(raw, overrides)
