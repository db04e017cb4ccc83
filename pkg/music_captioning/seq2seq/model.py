"""
Two-layer GRU encoder / two-layer GRU decoder regressing word embeddings.

The encoder runs over the track features from zero states; its final hidden
states (one per layer) form the context and initialize the matching decoder
layers. The decoder's first input is the zero vector; during training later
inputs are the ground-truth embeddings (teacher forcing), during greedy
decoding they are the embeddings of the words decoded so far.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from ..embeddings import EOS_TOKEN, EmbeddingTable, nearest_word
from ..errors import ShapeError
from ..nn import (
    GRU_PARAM_NAMES,
    GruCache,
    GruCellParams,
    component_rng,
    dense_backward,
    dense_forward,
    glorot_uniform,
    gru_cell_backward,
    gru_cell_forward,
    sequence_cosine_loss,
)

logger = logging.getLogger(__name__)

GRU_LAYERS = ("enc1", "enc2", "dec1", "dec2")


@dataclass
class Seq2SeqModel:
    enc1: GruCellParams
    enc2: GruCellParams
    dec1: GruCellParams
    dec2: GruCellParams
    proj_W: np.ndarray
    proj_b: np.ndarray

    def __post_init__(self):
        hidden = self.enc1.hidden_size
        if not (self.enc2.input_size == self.enc2.hidden_size == hidden
                and self.dec1.hidden_size == self.dec2.input_size == self.dec2.hidden_size == hidden):
            raise ShapeError("encoder and decoder layers must share the hidden size")
        if self.proj_W.shape != (self.dec1.input_size, hidden) or self.proj_b.shape != (self.dec1.input_size,):
            raise ShapeError(f"projection {self.proj_W.shape}/{self.proj_b.shape} does not map H={hidden} "
                             f"to D_w={self.dec1.input_size}")

    @property
    def input_dim(self) -> int:
        return self.enc1.input_size

    @property
    def hidden_size(self) -> int:
        return self.enc1.hidden_size

    @property
    def word_dim(self) -> int:
        return self.dec1.input_size

    @classmethod
    def initialize(cls, input_dim: int, word_dim: int, hidden_size: int, seed: int) -> "Seq2SeqModel":
        """Glorot-uniform weights from per-layer seeded streams, zero biases"""
        proj_rng = component_rng(seed, "seq2seq.proj")
        return cls(
            enc1=GruCellParams.initialize(input_dim, hidden_size, component_rng(seed, "seq2seq.enc1")),
            enc2=GruCellParams.initialize(hidden_size, hidden_size, component_rng(seed, "seq2seq.enc2")),
            dec1=GruCellParams.initialize(word_dim, hidden_size, component_rng(seed, "seq2seq.dec1")),
            dec2=GruCellParams.initialize(hidden_size, hidden_size, component_rng(seed, "seq2seq.dec2")),
            proj_W=glorot_uniform(proj_rng, (word_dim, hidden_size), fan_in=hidden_size, fan_out=word_dim),
            proj_b=np.zeros(word_dim),
        )

    @classmethod
    def zeros(cls, input_dim: int, word_dim: int, hidden_size: int) -> "Seq2SeqModel":
        return cls(
            enc1=GruCellParams.zeros(input_dim, hidden_size),
            enc2=GruCellParams.zeros(hidden_size, hidden_size),
            dec1=GruCellParams.zeros(word_dim, hidden_size),
            dec2=GruCellParams.zeros(hidden_size, hidden_size),
            proj_W=np.zeros((word_dim, hidden_size)),
            proj_b=np.zeros(word_dim),
        )

    def parameters(self) -> Dict[str, np.ndarray]:
        """Named views of every trainable tensor (updates through them are in place)"""
        params: Dict[str, np.ndarray] = {}
        for layer in GRU_LAYERS:
            params.update(getattr(self, layer).named_tensors(layer))
        params["proj.W"] = self.proj_W
        params["proj.b"] = self.proj_b
        return params


@dataclass
class Context:
    """Final encoder states per layer; trace holds encoder caches for backpropagation"""
    h1: np.ndarray
    h2: np.ndarray
    trace: Optional[List[Tuple[GruCache, GruCache]]] = field(default=None, repr=False)


@dataclass
class DecodeTrainResult:
    loss: float
    predictions: np.ndarray
    grads: Dict[str, np.ndarray]
    d_context: Tuple[np.ndarray, np.ndarray]
    d_tracks: Optional[np.ndarray]


def _as_sequence(tracks, dim: int) -> np.ndarray:
    tracks = np.asarray(tracks, dtype=np.float64)
    if tracks.ndim != 2 or tracks.shape[0] == 0:
        raise ShapeError(f"expected a non-empty N x {dim} track sequence, got shape {tracks.shape}")
    if tracks.shape[1] != dim:
        raise ShapeError(f"track features have dimension {tracks.shape[1]}, model expects {dim}")
    return tracks


def encode(model: Seq2SeqModel, tracks) -> Context:
    """Run both encoder layers left to right from zero states"""
    tracks = _as_sequence(tracks, model.input_dim)
    h1 = np.zeros(model.hidden_size)
    h2 = np.zeros(model.hidden_size)
    trace = []
    for x in tracks:
        h1, cache1 = gru_cell_forward(x, h1, model.enc1)
        h2, cache2 = gru_cell_forward(h1, h2, model.enc2)
        trace.append((cache1, cache2))
    return Context(h1, h2, trace)


def encode_batch(model: Seq2SeqModel, padded: np.ndarray, lengths) -> Context:
    """
    Encode a zero- or garbage-padded batch (B, N_max, D_in).
    Steps at positions >= lengths[b] leave row b's states untouched.
    """
    padded = np.asarray(padded, dtype=np.float64)
    lengths = np.asarray(lengths)
    if padded.ndim != 3 or padded.shape[2] != model.input_dim or lengths.shape != (padded.shape[0],):
        raise ShapeError(f"batch encode got padded {padded.shape}, lengths {lengths.shape}")
    if np.any(lengths < 1) or np.any(lengths > padded.shape[1]):
        raise ShapeError("every sequence length must lie in [1, N_max]")

    batch = padded.shape[0]
    h1 = np.zeros((batch, model.hidden_size))
    h2 = np.zeros((batch, model.hidden_size))
    for n in range(padded.shape[1]):
        mask = n < lengths
        h1, _ = gru_cell_forward(padded[:, n, :], h1, model.enc1, mask=mask)
        h2, _ = gru_cell_forward(h1, h2, model.enc2, mask=mask)
    return Context(h1, h2)


def _decoder_inputs(targets: np.ndarray) -> np.ndarray:
    inputs = np.zeros_like(targets)
    inputs[1:] = targets[:-1]
    return inputs


def _decoder_forward(model: Seq2SeqModel, context: Context, inputs: np.ndarray):
    s1, s2 = context.h1, context.h2
    predictions = np.empty((inputs.shape[0], model.word_dim))
    steps = []
    for m, x in enumerate(inputs):
        s1, cache1 = gru_cell_forward(x, s1, model.dec1)
        s2, cache2 = gru_cell_forward(s1, s2, model.dec2)
        predictions[m] = dense_forward(s2, model.proj_W, model.proj_b)
        steps.append((cache1, cache2, s2))
    return predictions, steps


def _accumulate(grads: Dict[str, np.ndarray], layer: str, cell_grads: Dict[str, np.ndarray]):
    for name in GRU_PARAM_NAMES:
        grads[f"{layer}.{name}"] += cell_grads[name]


def _check_targets(model: Seq2SeqModel, targets) -> np.ndarray:
    targets = np.asarray(targets, dtype=np.float64)
    if targets.ndim != 2 or targets.shape[0] < 1 or targets.shape[1] != model.word_dim:
        raise ShapeError(f"expected M x {model.word_dim} targets with M >= 1, got {targets.shape}")
    return targets


def teacher_forced_predictions(model: Seq2SeqModel, context: Context, targets) -> np.ndarray:
    targets = _check_targets(model, targets)
    predictions, _ = _decoder_forward(model, context, _decoder_inputs(targets))
    return predictions


def decode_train(model: Seq2SeqModel, context: Context, targets) -> DecodeTrainResult:
    """
    Teacher-forced decode, mean cosine-proximity loss and backpropagation through time.

    When the context carries an encoder trace the gradient continues through the
    encoder, so grads cover every model parameter and d_tracks holds the
    gradient with respect to each input track feature.
    """
    targets = _check_targets(model, targets)
    predictions, steps = _decoder_forward(model, context, _decoder_inputs(targets))
    loss, dpreds = sequence_cosine_loss(predictions, targets)

    grads = {name: np.zeros_like(value) for name, value in model.parameters().items()}
    ds1 = np.zeros(model.hidden_size)
    ds2 = np.zeros(model.hidden_size)
    for m in reversed(range(len(steps))):
        cache1, cache2, s2 = steps[m]
        dx_proj, dW, db = dense_backward(dpreds[m], s2, model.proj_W)
        grads["proj.W"] += dW
        grads["proj.b"] += db
        dx2, ds2, cell_grads = gru_cell_backward(ds2 + dx_proj, cache2, model.dec2)
        _accumulate(grads, "dec2", cell_grads)
        _, ds1, cell_grads = gru_cell_backward(ds1 + dx2, cache1, model.dec1)
        _accumulate(grads, "dec1", cell_grads)

    d_tracks = None
    if context.trace is not None:
        d_tracks = _encoder_backward(model, context.trace, ds1, ds2, grads)

    return DecodeTrainResult(loss, predictions, grads, (ds1, ds2), d_tracks)


def _encoder_backward(model: Seq2SeqModel, trace, dh1: np.ndarray, dh2: np.ndarray,
                      grads: Dict[str, np.ndarray]) -> np.ndarray:
    d_tracks = np.zeros((len(trace), model.input_dim))
    for n in reversed(range(len(trace))):
        cache1, cache2 = trace[n]
        dx2, dh2, cell_grads = gru_cell_backward(dh2, cache2, model.enc2)
        _accumulate(grads, "enc2", cell_grads)
        d_tracks[n], dh1, cell_grads = gru_cell_backward(dh1 + dx2, cache1, model.enc1)
        _accumulate(grads, "enc1", cell_grads)
    return d_tracks


def decode_greedy(model: Seq2SeqModel, context: Context, table: EmbeddingTable, max_len: int) -> List[str]:
    """
    Greedy word-by-word decode. Each prediction is snapped to its nearest
    vocabulary word, whose stored embedding is the next input. Stops at <eos>
    (not returned) or after max_len steps.
    """
    if max_len < 1:
        raise ShapeError(f"max_len must be at least 1, got {max_len}")
    if table.dim != model.word_dim:
        raise ShapeError(f"embedding dimension {table.dim} does not match model D_w={model.word_dim}")

    s1, s2 = context.h1, context.h2
    x = np.zeros(model.word_dim)
    tokens: List[str] = []
    for _ in range(max_len):
        s1, _ = gru_cell_forward(x, s1, model.dec1)
        s2, _ = gru_cell_forward(s1, s2, model.dec2)
        word = nearest_word(table, dense_forward(s2, model.proj_W, model.proj_b))
        if word.token == EOS_TOKEN:
            break
        tokens.append(word.token)
        x = table.matrix[word.row]
    return tokens
