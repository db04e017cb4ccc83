"""
Per-example ADAM training loop with validation-based early stopping.
"""
import logging
import math
import time
from typing import List, Literal, Optional, Sequence

import numpy as np
from pydantic import BaseModel

from ..config import RunConfig
from ..errors import DataError, NumericalError
from ..fully_train import FullyTrainBundle
from ..nn import AdamOptimizer, component_rng
from ..seq2seq import Seq2SeqModel
from .examples import Example, FullyTrainExample, PretrainExample
from .objectives import CaptionObjective, FullyTrainObjective, PretrainObjective

logger = logging.getLogger(__name__)


class EpochRecord(BaseModel):
    epoch: int
    train_loss: float
    validation_loss: float
    best_validation_loss: float


class TrainingReport(BaseModel):
    mode: str
    epochs: List[EpochRecord]
    best_epoch: int
    best_validation_loss: float
    stop_reason: Literal["patience", "max_epochs"]
    monitored: Literal["validation", "train"]
    train_size: int
    validation_size: int
    wall_time_seconds: float

    @property
    def train_losses(self) -> List[float]:
        return [record.train_loss for record in self.epochs]

    @property
    def validation_losses(self) -> List[float]:
        return [record.validation_loss for record in self.epochs]

    def to_json(self) -> str:
        return self.model_dump_json(indent=2)


def _mean_loss(objective: CaptionObjective, examples: Sequence[Example]) -> float:
    return float(np.mean([objective.validation_loss(example) for example in examples]))


def fit(objective: CaptionObjective, train: Sequence[Example], validation: Sequence[Example],
        config: RunConfig) -> TrainingReport:
    """
    Train with batch size 1 in a seeded shuffled order.

    The epoch's train loss is the mean of the per-example losses seen before
    each update. After every epoch the objective's validation loss is measured
    (the caption loss alone, so the label head never drives stopping); training
    stops once more than `patience` consecutive epochs fail to improve it
    (patience None never stops early). The best parameters are restored at the end.
    """
    if not train:
        raise DataError("training set is empty")
    training = config.training
    monitored = "validation"
    if not validation:
        logger.warning("Validation split is empty; monitoring the training loss instead")
        monitored = "train"

    started = time.perf_counter()
    optimizer = AdamOptimizer(objective.parameters(), lr=config.optimizer.lr, beta1=config.optimizer.beta1,
                              beta2=config.optimizer.beta2, epsilon=config.optimizer.epsilon)
    rng = component_rng(training.seed, "training.shuffle")

    best_loss = math.inf
    best_epoch = 0
    best_params = objective.snapshot()
    wait = 0
    stop_reason = "max_epochs"
    records: List[EpochRecord] = []

    for epoch in range(1, training.epochs + 1):
        losses = []
        for index in rng.permutation(len(train)):
            loss, grads = objective.loss_and_grads(train[index])
            if not math.isfinite(loss):
                raise NumericalError(f"non-finite training loss in epoch {epoch} on playlist "
                                     f"'{train[index].playlist_id}'", epoch=epoch)
            optimizer.step(grads, loss)
            losses.append(loss)
        train_loss = float(np.mean(losses))

        validation_loss = _mean_loss(objective, validation) if validation else train_loss
        if not math.isfinite(validation_loss):
            raise NumericalError(f"non-finite validation loss in epoch {epoch}", epoch=epoch)

        if validation_loss < best_loss:
            best_loss, best_epoch, wait = validation_loss, epoch, 0
            best_params = objective.snapshot()
        else:
            wait += 1

        records.append(EpochRecord(epoch=epoch, train_loss=train_loss, validation_loss=validation_loss,
                                   best_validation_loss=best_loss))
        logger.info(f"Epoch {epoch}/{training.epochs}: train={train_loss:.6f} "
                    f"{monitored}={validation_loss:.6f} best={best_loss:.6f}@{best_epoch}")

        if training.patience is not None and wait > training.patience:
            stop_reason = "patience"
            logger.info(f"Early stopping after epoch {epoch}: no improvement for {wait} epochs")
            break

    objective.restore(best_params)
    return TrainingReport(
        mode=objective.name,
        epochs=records,
        best_epoch=best_epoch,
        best_validation_loss=best_loss,
        stop_reason=stop_reason,
        monitored=monitored,
        train_size=len(train),
        validation_size=len(validation),
        wall_time_seconds=time.perf_counter() - started,
    )


def fit_pretrain(model: Seq2SeqModel, train: Sequence[PretrainExample], validation: Sequence[PretrainExample],
                 config: RunConfig) -> TrainingReport:
    return fit(PretrainObjective(model), train, validation, config)


def fit_fully(bundle: FullyTrainBundle, train: Sequence[FullyTrainExample],
              validation: Sequence[FullyTrainExample], config: RunConfig,
              label_weight: Optional[float] = None) -> TrainingReport:
    """Joint training of every block; label_weight defaults to the configured lambda"""
    weight = config.training.label_weight if label_weight is None else label_weight
    return fit(FullyTrainObjective(bundle, weight), train, validation, config)
