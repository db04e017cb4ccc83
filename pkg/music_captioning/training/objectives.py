"""
Training objectives for the two track-feature paths, plus saving and restoring them as checkpoints.
"""
import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Tuple, Union

import numpy as np

from ..config import RunConfig, TrainingMode, build_run_config
from ..embeddings import EmbeddingTable, vocab_hash
from ..errors import CheckpointFormatError, ConfigError
from ..fully_train import FullyTrainBundle, bundle_loss, playlist_context
from ..nn import sequence_cosine_loss
from ..seq2seq import (
    Context,
    Seq2SeqModel,
    check_against_template,
    decode_greedy,
    decode_train,
    encode,
    read_checkpoint,
    save_checkpoint,
    teacher_forced_predictions,
)
from .examples import Example, FullyTrainExample, PretrainExample

logger = logging.getLogger(__name__)


class CaptionObjective(ABC):
    """Base class for trainable captioning objectives"""

    def __init__(self, name: str):
        self.name = name

    @property
    @abstractmethod
    def model(self) -> Seq2SeqModel:
        """The seq2seq model that decodes captions"""

    @abstractmethod
    def parameters(self) -> Dict[str, np.ndarray]:
        """Every trainable tensor, keyed by checkpoint name"""

    @abstractmethod
    def loss_and_grads(self, example: Example) -> Tuple[float, Dict[str, np.ndarray]]:
        """Training loss of one example and its gradient for every parameter"""

    @abstractmethod
    def loss(self, example: Example) -> float:
        """Forward-only training loss"""

    @abstractmethod
    def context(self, example: Example) -> Context:
        """Encoder context for inference"""

    def validation_loss(self, example: Example) -> float:
        """Loss that early stopping and best-checkpoint selection monitor"""
        return self.loss(example)

    def caption_loss(self, example: Example) -> float:
        """Teacher-forced mean cosine loss of the caption alone"""
        predictions = self.predictions(example)
        loss, _ = sequence_cosine_loss(predictions, example.target.embeddings)
        return loss

    def predictions(self, example: Example) -> np.ndarray:
        return teacher_forced_predictions(self.model, self.context(example), example.target.embeddings)

    def caption(self, example: Example, table: EmbeddingTable, max_len: int) -> List[str]:
        return decode_greedy(self.model, self.context(example), table, max_len)

    def snapshot(self) -> Dict[str, np.ndarray]:
        return {name: value.copy() for name, value in self.parameters().items()}

    def restore(self, snapshot: Dict[str, np.ndarray]):
        for name, value in self.parameters().items():
            value[...] = snapshot[name]


class PretrainObjective(CaptionObjective):
    """Seq2seq over precomputed track features"""

    def __init__(self, model: Seq2SeqModel):
        super().__init__(TrainingMode.PRETRAIN_FEATURES.value)
        self._model = model

    @property
    def model(self) -> Seq2SeqModel:
        return self._model

    def parameters(self) -> Dict[str, np.ndarray]:
        return self._model.parameters()

    def loss_and_grads(self, example: PretrainExample) -> Tuple[float, Dict[str, np.ndarray]]:
        result = decode_train(self._model, encode(self._model, example.tracks), example.target.embeddings)
        return result.loss, result.grads

    def loss(self, example: PretrainExample) -> float:
        return self.caption_loss(example)

    def context(self, example: PretrainExample) -> Context:
        return encode(self._model, example.tracks)


class FullyTrainObjective(CaptionObjective):
    """Summarizers, label head and seq2seq trained jointly"""

    def __init__(self, bundle: FullyTrainBundle, label_weight: float = 1.0):
        super().__init__(TrainingMode.FULLY_TRAIN.value)
        if label_weight < 0:
            raise ConfigError(f"label weight must be non-negative, got {label_weight}", field="training.lambda")
        self.bundle = bundle
        self.label_weight = label_weight

    @property
    def model(self) -> Seq2SeqModel:
        return self.bundle.seq2seq

    def parameters(self) -> Dict[str, np.ndarray]:
        return self.bundle.parameters()

    def loss_and_grads(self, example: FullyTrainExample) -> Tuple[float, Dict[str, np.ndarray]]:
        result = bundle_loss(self.bundle, example.tracks, example.target.embeddings, self.label_weight)
        return result.total, result.grads

    def loss(self, example: FullyTrainExample) -> float:
        return bundle_loss(self.bundle, example.tracks, example.target.embeddings, self.label_weight,
                           compute_grads=False).total

    def validation_loss(self, example: FullyTrainExample) -> float:
        # caption term only; the label head is auxiliary
        return bundle_loss(self.bundle, example.tracks, example.target.embeddings, self.label_weight,
                           compute_grads=False).caption_loss

    def context(self, example: FullyTrainExample) -> Context:
        return playlist_context(self.bundle, example.tracks)


def build_objective(config: RunConfig, with_head: bool = True, zeros: bool = False) -> CaptionObjective:
    """
    Objective for the configured mode.

    zeros builds an all-zero template (used to validate checkpoints) instead of a seeded initialization.
    """
    dims, seed = config.dims, config.training.seed
    if config.mode is TrainingMode.FULLY_TRAIN:
        sentence_dim = dims.resolved_sentence_dim
        if zeros:
            bundle = FullyTrainBundle.zeros(dims.audio_dim, dims.word_dim, dims.hidden_size, sentence_dim,
                                            dims.num_labels, with_head=with_head)
        else:
            bundle = FullyTrainBundle.initialize(dims.audio_dim, dims.word_dim, dims.hidden_size, sentence_dim,
                                                 dims.num_labels, seed, with_head=with_head)
        return FullyTrainObjective(bundle, config.training.label_weight)

    input_dim = dims.audio_dim + dims.word_dim
    if zeros:
        return PretrainObjective(Seq2SeqModel.zeros(input_dim, dims.word_dim, dims.hidden_size))
    return PretrainObjective(Seq2SeqModel.initialize(input_dim, dims.word_dim, dims.hidden_size, seed))


def checkpoint_config(objective: CaptionObjective, config: RunConfig, table: EmbeddingTable) -> Dict[str, Any]:
    """Config block stored in checkpoints; the output path is left out so reruns are byte-identical"""
    stored = config.model_copy(update={"paths": config.paths.model_copy(update={"checkpoint_out": None})})
    has_head = isinstance(objective, FullyTrainObjective) and objective.bundle.head is not None
    return {
        "mode": objective.name,
        "run_config": stored.to_dict(),
        "label_head": has_head,
        "vocab_hash": vocab_hash(table),
        "vocab_size": table.vocab_size,
    }


def save_objective(path: Union[str, Path], objective: CaptionObjective, config: RunConfig, table: EmbeddingTable):
    save_checkpoint(path, objective.parameters(), checkpoint_config(objective, config, table))


@dataclass
class RestoredObjective:
    objective: CaptionObjective
    config: RunConfig
    vocab_hash: str


def load_objective(path: Union[str, Path]) -> RestoredObjective:
    """Rebuild the objective recorded in a checkpoint and load its parameters"""
    checkpoint = read_checkpoint(path)
    stored = checkpoint.config
    try:
        config = build_run_config(stored["run_config"])
        has_head = bool(stored.get("label_head", False))
        recorded_hash = str(stored["vocab_hash"])
    except (KeyError, TypeError, ValueError, ConfigError) as e:
        raise CheckpointFormatError(f"checkpoint {path} has an invalid config block: {e}", path=str(path)) from e

    objective = build_objective(config, with_head=has_head, zeros=True)
    try:
        check_against_template(checkpoint, objective.parameters())
    except CheckpointFormatError as e:
        e.context.setdefault("path", str(path))
        raise
    objective.restore(checkpoint.tensors)
    logger.info(f"Loaded {objective.name} checkpoint from {path}")
    return RestoredObjective(objective, config, recorded_hash)
