"""
Caption quality metrics for a trained objective.
"""
import logging
from typing import Sequence

import numpy as np
from pydantic import BaseModel, Field

from .embeddings import EOS_TOKEN, EmbeddingTable, nearest_word
from .errors import DataError
from .training import CaptionObjective, Example

logger = logging.getLogger(__name__)


class EvalMetrics(BaseModel):
    mean_loss: float = Field(description="mean teacher-forced cosine loss of the captions")
    exact_match_rate: float = Field(ge=0.0, le=1.0, description="share of greedy captions equal to the target")
    token_agreement: float = Field(ge=0.0, le=1.0,
                                   description="share of target positions whose teacher-forced prediction "
                                               "decodes to the target token")
    count: int = Field(ge=1)


def evaluate(objective: CaptionObjective, examples: Sequence[Example], table: EmbeddingTable,
             max_len: int) -> EvalMetrics:
    """
    Evaluate captions against their targets.

    Greedy captions are compared without the closing <eos>; token agreement
    pools every target position, <eos> included.
    """
    if not examples:
        raise DataError("nothing to evaluate: no playlists")

    losses, matches = [], 0
    agreed, positions = 0, 0
    for example in examples:
        losses.append(objective.caption_loss(example))

        expected = [token for token in example.target.tokens if token != EOS_TOKEN]
        if objective.caption(example, table, max_len) == expected:
            matches += 1

        for prediction, token in zip(objective.predictions(example), example.target.tokens):
            agreed += nearest_word(table, prediction).token == token
            positions += 1

    metrics = EvalMetrics(
        mean_loss=float(np.mean(losses)),
        exact_match_rate=matches / len(examples),
        token_agreement=agreed / positions,
        count=len(examples),
    )
    logger.info(f"Evaluated {metrics.count} playlists: loss={metrics.mean_loss:.6f} "
                f"exact={metrics.exact_match_rate:.3f} tokens={metrics.token_agreement:.3f}")
    return metrics
