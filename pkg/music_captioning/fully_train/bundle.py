"""
Fully-training bundle: audio summarizer + text summarizer (+ label head) feeding the seq2seq model.
Every block is trained jointly against the caption loss plus the weighted label loss.
"""
import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

import numpy as np

from ..errors import ShapeError
from ..nn import GruCellParams, component_rng, sequence_cosine_loss
from ..seq2seq import Context, Seq2SeqModel, decode_train, encode, teacher_forced_predictions
from .label_head import LabelHeadParams, label_head_backward, label_head_forward, multitask_loss
from .summarizers import (
    AudioSummarizerParams,
    audio_summarize,
    audio_summarize_backward,
    text_summarize,
    text_summarize_backward,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RawTrack:
    """One track's raw inputs: F x T spectrogram, K x D_w metadata embeddings (K may be 0), optional labels"""
    spectrogram: np.ndarray
    word_embeddings: np.ndarray
    labels: Optional[np.ndarray] = None


@dataclass
class BundleLoss:
    total: float
    caption_loss: float
    label_loss: float
    grads: Optional[Dict[str, np.ndarray]]


@dataclass
class FullyTrainBundle:
    audio: AudioSummarizerParams
    text: GruCellParams
    seq2seq: Seq2SeqModel
    head: Optional[LabelHeadParams] = None

    def __post_init__(self):
        if self.text.input_size != self.seq2seq.word_dim:
            raise ShapeError(f"text summarizer input {self.text.input_size} != D_w={self.seq2seq.word_dim}")
        if self.seq2seq.input_dim != self.track_dim:
            raise ShapeError(f"encoder input {self.seq2seq.input_dim} != D_a + D_s = {self.track_dim}")
        if self.head is not None and self.head.input_dim != self.track_dim:
            raise ShapeError(f"label head input {self.head.input_dim} != track feature size {self.track_dim}")

    @property
    def track_dim(self) -> int:
        return self.audio.output_dim + self.text.hidden_size

    @classmethod
    def initialize(cls, audio_dim: int, word_dim: int, hidden_size: int, sentence_dim: int,
                   num_labels: int, seed: int, with_head: bool = True) -> "FullyTrainBundle":
        """Seeded initialization; each block draws from its own stream"""
        track_dim = audio_dim + sentence_dim
        head = None
        if with_head:
            head = LabelHeadParams.initialize(track_dim, num_labels, component_rng(seed, "fully.head"))
        return cls(
            audio=AudioSummarizerParams.initialize(audio_dim, component_rng(seed, "fully.audio")),
            text=GruCellParams.initialize(word_dim, sentence_dim, component_rng(seed, "fully.text")),
            seq2seq=Seq2SeqModel.initialize(track_dim, word_dim, hidden_size, seed),
            head=head,
        )

    @classmethod
    def zeros(cls, audio_dim: int, word_dim: int, hidden_size: int, sentence_dim: int,
              num_labels: int, with_head: bool = True) -> "FullyTrainBundle":
        track_dim = audio_dim + sentence_dim
        return cls(
            audio=AudioSummarizerParams.zeros(audio_dim),
            text=GruCellParams.zeros(word_dim, sentence_dim),
            seq2seq=Seq2SeqModel.zeros(track_dim, word_dim, hidden_size),
            head=LabelHeadParams.zeros(track_dim, num_labels) if with_head else None,
        )

    def parameters(self) -> Dict[str, np.ndarray]:
        params = dict(self.audio.named_tensors("audio"))
        params.update(self.text.named_tensors("text"))
        if self.head is not None:
            params.update(self.head.named_tensors("head"))
        params.update({f"seq2seq.{name}": value for name, value in self.seq2seq.parameters().items()})
        return params


def _track_features(bundle: FullyTrainBundle, tracks: Sequence[RawTrack]):
    if not tracks:
        raise ShapeError("a playlist needs at least one track")
    features = np.empty((len(tracks), bundle.track_dim))
    caches = []
    for i, track in enumerate(tracks):
        audio, audio_cache = audio_summarize(bundle.audio, track.spectrogram)
        if track.word_embeddings.shape[0] > 0:
            sentence, text_trace = text_summarize(bundle.text, track.word_embeddings)
        else:
            sentence, text_trace = np.zeros(bundle.text.hidden_size), None
        features[i] = np.concatenate([audio, sentence])
        caches.append((audio_cache, text_trace))
    return features, caches


def track_features(bundle: FullyTrainBundle, tracks: Sequence[RawTrack]) -> np.ndarray:
    """N x (D_a + D_s) encoder inputs"""
    features, _ = _track_features(bundle, tracks)
    return features


def playlist_context(bundle: FullyTrainBundle, tracks: Sequence[RawTrack]) -> Context:
    return encode(bundle.seq2seq, track_features(bundle, tracks))


def bundle_loss(bundle: FullyTrainBundle, tracks: Sequence[RawTrack], targets: np.ndarray,
                label_weight: float, compute_grads: bool = True) -> BundleLoss:
    """
    Caption loss plus label_weight times the label loss averaged over labelled tracks.

    With compute_grads, grads is keyed like bundle.parameters() and covers every block.
    """
    features, caches = _track_features(bundle, tracks)
    context = encode(bundle.seq2seq, features)

    labelled: List[int] = []
    if bundle.head is not None:
        labelled = [i for i, track in enumerate(tracks) if track.labels is not None]

    if not compute_grads:
        predictions = teacher_forced_predictions(bundle.seq2seq, context, targets)
        caption_loss, _ = sequence_cosine_loss(predictions, np.asarray(targets, dtype=np.float64))
        total, label_total = caption_loss, 0.0
        for i in labelled:
            outputs = label_head_forward(bundle.head, features[i])
            step = multitask_loss(0.0, outputs, tracks[i].labels, label_weight / len(labelled))
            total += step.total
            label_total += step.label_loss
        return BundleLoss(total, caption_loss, label_total / len(labelled) if labelled else 0.0, None)

    result = decode_train(bundle.seq2seq, context, targets)
    grads = {name: np.zeros_like(value) for name, value in bundle.parameters().items()}
    for name, value in result.grads.items():
        grads[f"seq2seq.{name}"] += value
    d_features = result.d_tracks

    total, label_total = result.loss, 0.0
    for i in labelled:
        outputs = label_head_forward(bundle.head, features[i])
        step = multitask_loss(0.0, outputs, tracks[i].labels, label_weight / len(labelled))
        total += step.total
        label_total += step.label_loss
        dfeature, head_grads = label_head_backward(step.doutputs, features[i], outputs, bundle.head)
        d_features[i] += dfeature
        grads["head.W"] += head_grads["W"]
        grads["head.b"] += head_grads["b"]

    audio_dim = bundle.audio.output_dim
    for i, (audio_cache, text_trace) in enumerate(caches):
        audio_grads, _ = audio_summarize_backward(d_features[i, :audio_dim], audio_cache, bundle.audio)
        for name, value in audio_grads.items():
            grads[f"audio.{name}"] += value
        if text_trace is not None:
            text_grads, _ = text_summarize_backward(d_features[i, audio_dim:], text_trace, bundle.text)
            for name, value in text_grads.items():
                grads[f"text.{name}"] += value

    label_loss = label_total / len(labelled) if labelled else 0.0
    return BundleLoss(total, result.loss, label_loss, grads)

