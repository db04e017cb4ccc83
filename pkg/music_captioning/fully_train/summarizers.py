"""
Trainable per-track summarizers for the fully-training path.

Audio: conv3x3(1->8) -> ReLU -> maxpool2x2 -> conv3x3(8->16) -> ReLU -> maxpool2x2
       -> global average per channel -> dense(16 -> D_a)
Text:  single-layer GRU over the metadata word embeddings; the final state is the sentence vector.
"""
import logging
from dataclasses import dataclass
from typing import Dict, List, Tuple

import numpy as np

from ..errors import NumericalError, ShapeError, StaleCacheError
from ..nn import (
    GRU_PARAM_NAMES,
    GruCache,
    GruCellParams,
    conv3x3_backward,
    conv3x3_forward,
    dense_backward,
    dense_forward,
    global_average_pool_backward,
    global_average_pool_forward,
    glorot_uniform,
    gru_cell_backward,
    gru_cell_forward,
    max_pool2x2_backward,
    max_pool2x2_forward,
    relu_backward,
    relu_forward,
)
from ..nn.conv import ConvCache, PoolCache

logger = logging.getLogger(__name__)

AUDIO_CHANNELS = (8, 16)
MIN_SPECTROGRAM_SIZE = 4
AUDIO_PARAM_NAMES = ("conv1.W", "conv1.b", "conv2.W", "conv2.b", "dense.W", "dense.b")

# Sentence summarizer is a plain GRU cell
TextSummarizerParams = GruCellParams


@dataclass
class AudioSummarizerParams:
    conv1_W: np.ndarray
    conv1_b: np.ndarray
    conv2_W: np.ndarray
    conv2_b: np.ndarray
    dense_W: np.ndarray
    dense_b: np.ndarray

    def __post_init__(self):
        c1, c2 = AUDIO_CHANNELS
        expected = {
            "conv1_W": (c1, 1, 3, 3), "conv1_b": (c1,),
            "conv2_W": (c2, c1, 3, 3), "conv2_b": (c2,),
            "dense_W": (self.dense_b.shape[0], c2), "dense_b": (self.dense_b.shape[0],),
        }
        for name, shape in expected.items():
            if getattr(self, name).shape != shape:
                raise ShapeError(f"audio summarizer {name} has shape {getattr(self, name).shape}, expected {shape}")

    @property
    def output_dim(self) -> int:
        return self.dense_b.shape[0]

    @classmethod
    def zeros(cls, output_dim: int) -> "AudioSummarizerParams":
        c1, c2 = AUDIO_CHANNELS
        return cls(np.zeros((c1, 1, 3, 3)), np.zeros(c1), np.zeros((c2, c1, 3, 3)), np.zeros(c2),
                   np.zeros((output_dim, c2)), np.zeros(output_dim))

    @classmethod
    def initialize(cls, output_dim: int, rng: np.random.Generator) -> "AudioSummarizerParams":
        c1, c2 = AUDIO_CHANNELS
        return cls(
            conv1_W=glorot_uniform(rng, (c1, 1, 3, 3), fan_in=9, fan_out=c1 * 9),
            conv1_b=np.zeros(c1),
            conv2_W=glorot_uniform(rng, (c2, c1, 3, 3), fan_in=c1 * 9, fan_out=c2 * 9),
            conv2_b=np.zeros(c2),
            dense_W=glorot_uniform(rng, (output_dim, c2), fan_in=c2, fan_out=output_dim),
            dense_b=np.zeros(output_dim),
        )

    def named_tensors(self, prefix: str) -> Dict[str, np.ndarray]:
        return {f"{prefix}.{name}": getattr(self, name.replace(".", "_")) for name in AUDIO_PARAM_NAMES}


@dataclass
class AudioCache:
    params: AudioSummarizerParams
    conv1: ConvCache
    pre1: np.ndarray
    pool1: PoolCache
    conv2: ConvCache
    pre2: np.ndarray
    pool2: PoolCache
    pooled_shape: Tuple[int, int, int]
    summary: np.ndarray


def audio_summarize(params: AudioSummarizerParams, spectrogram: np.ndarray) -> Tuple[np.ndarray, AudioCache]:
    """
    Summarize an F x T spectrogram (F, T >= 4) into a D_a vector.

    Both 3x3 convolutions use one pixel of edge padding rather than valid
    padding, so a 4x4 input still survives two 2x2 pools.
    """
    spectrogram = np.asarray(spectrogram, dtype=np.float64)
    if spectrogram.ndim != 2:
        raise ShapeError(f"spectrogram must be an F x T matrix, got shape {spectrogram.shape}")
    if min(spectrogram.shape) < MIN_SPECTROGRAM_SIZE:
        raise ShapeError(f"spectrogram {spectrogram.shape[0]}x{spectrogram.shape[1]} is smaller than "
                         f"{MIN_SPECTROGRAM_SIZE}x{MIN_SPECTROGRAM_SIZE}")
    if not np.all(np.isfinite(spectrogram)):
        raise NumericalError("spectrogram contains non-finite values")

    pre1, conv1 = conv3x3_forward(spectrogram[np.newaxis], params.conv1_W, params.conv1_b)
    map1, pool1 = max_pool2x2_forward(relu_forward(pre1))
    pre2, conv2 = conv3x3_forward(map1, params.conv2_W, params.conv2_b)
    map2, pool2 = max_pool2x2_forward(relu_forward(pre2))
    summary = global_average_pool_forward(map2)
    out = dense_forward(summary, params.dense_W, params.dense_b)
    return out, AudioCache(params, conv1, pre1, pool1, conv2, pre2, pool2, map2.shape, summary)


def audio_summarize_backward(dout: np.ndarray, cache: AudioCache,
                             params: AudioSummarizerParams) -> Tuple[Dict[str, np.ndarray], np.ndarray]:
    """Returns (grads keyed by AUDIO_PARAM_NAMES, d spectrogram)"""
    if cache.params is not params:
        raise StaleCacheError("audio cache was produced with different parameters")
    dsummary, dW_dense, db_dense = dense_backward(dout, cache.summary, params.dense_W)
    dmap2 = global_average_pool_backward(dsummary, cache.pooled_shape)
    dpre2 = relu_backward(max_pool2x2_backward(dmap2, cache.pool2), cache.pre2)
    dmap1, dW2, db2 = conv3x3_backward(dpre2, cache.conv2, params.conv2_W)
    dpre1 = relu_backward(max_pool2x2_backward(dmap1, cache.pool1), cache.pre1)
    dx, dW1, db1 = conv3x3_backward(dpre1, cache.conv1, params.conv1_W)
    grads = {
        "conv1.W": dW1, "conv1.b": db1,
        "conv2.W": dW2, "conv2.b": db2,
        "dense.W": dW_dense, "dense.b": db_dense,
    }
    return grads, dx[0]


def text_summarize(params: TextSummarizerParams, word_embeddings: np.ndarray) -> Tuple[np.ndarray, List[GruCache]]:
    """Run the GRU over K word embeddings from a zero state; returns the final state"""
    word_embeddings = np.asarray(word_embeddings, dtype=np.float64)
    if word_embeddings.ndim != 2 or word_embeddings.shape[0] == 0:
        raise ShapeError(f"text summarizer needs a non-empty K x D_w sequence, got {word_embeddings.shape}")
    h = np.zeros(params.hidden_size)
    trace = []
    for x in word_embeddings:
        h, cache = gru_cell_forward(x, h, params)
        trace.append(cache)
    return h, trace


def text_summarize_backward(dsentence: np.ndarray, trace: List[GruCache],
                            params: TextSummarizerParams) -> Tuple[Dict[str, np.ndarray], np.ndarray]:
    """Returns (GRU grads, d word embeddings)"""
    grads = {name: np.zeros_like(getattr(params, name)) for name in GRU_PARAM_NAMES}
    dwords = np.zeros((len(trace), params.input_size))
    dh = dsentence
    for k in reversed(range(len(trace))):
        dwords[k], dh, step = gru_cell_backward(dh, trace[k], params)
        for name, value in step.items():
            grads[name] += value
    return grads, dwords
