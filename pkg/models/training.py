"""
Training loop
-------------
Mini-batch Adam on MSE with a chronological validation tail and early stopping.

- validation = the last ceil(validation_split * m) windows, never shuffled in
- train batches are reshuffled every epoch from a seeded generator
- early stopping watches validation loss (strict improvement), restores the best epoch
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from core.errors import TrainingError, ValidationError
from core.io import write_csv_atomic
from core.seeds import stage_rng
from models.network import Mode, backward, forward, init_parameters, mse_loss, predict, validate_spec
from models.optim import AdamState, adam_step

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 1e-4
    batch_size: int = 16
    max_epochs: int = 250
    validation_split: float = 0.1
    patience: int = 5
    seed: int = 42
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_epsilon: float = 1e-8

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ValidationError(f"learning_rate must be > 0, got {self.learning_rate}")
        if not 0.0 < self.validation_split < 1.0:
            raise ValidationError(f"validation_split must be in (0, 1), got {self.validation_split}")
        if self.patience < 1:
            raise ValidationError(f"patience must be >= 1, got {self.patience}")
        if self.batch_size < 1:
            raise ValidationError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.max_epochs < 1:
            raise ValidationError(f"max_epochs must be >= 1, got {self.max_epochs}")


@dataclass
class TrainHistory:
    train_loss: list = field(default_factory=list)
    val_loss: list = field(default_factory=list)
    best_epoch: int | None = None
    stopped_epoch: int | None = None

    @property
    def epochs(self):
        return len(self.val_loss)

    def to_frame(self):
        return pd.DataFrame(
            {"epoch": range(1, self.epochs + 1), "train_loss": self.train_loss, "val_loss": self.val_loss}
        )


class EarlyStopping:
    """Stop after `patience` epochs without a strictly lower validation loss.

    Epochs are 1-based; on ties the earliest epoch stays best.
    """

    def __init__(self, patience=5, min_delta=0.0):
        if patience < 1:
            raise ValidationError(f"patience must be >= 1, got {patience}")
        self.patience = patience
        self.min_delta = min_delta
        self.best_loss = math.inf
        self.best_epoch = None
        self.best_params = None
        self.wait = 0

    def update(self, epoch, val_loss, params=None):
        """Record one epoch; returns True when training should stop."""
        if val_loss < self.best_loss - self.min_delta:
            self.best_loss = val_loss
            self.best_epoch = epoch
            self.best_params = params.copy() if params is not None else None
            self.wait = 0
        else:
            self.wait += 1
        return self.wait >= self.patience


def validation_cut(m, validation_split):
    """Number of leading windows used for training."""
    # round() keeps e.g. 0.1 * 30 from landing a hair above 3
    n_val = math.ceil(round(validation_split * m, 9))
    if n_val < 1 or m - n_val < 1:
        raise ValidationError(f"validation split {validation_split} of {m} windows leaves an empty train or validation set")
    return m - n_val


def evaluate_loss(spec, params, samples, targets):
    loss, _ = mse_loss(predict(spec, params, samples), targets)
    return loss


def train(spec, windows, config=None, params=None):
    """Fit `spec` on a WindowedSet; returns (best parameters, TrainHistory)."""
    config = config or TrainConfig()
    validate_spec(spec)
    m = len(windows)
    if m == 0:
        raise ValidationError("no training windows")
    cut = validation_cut(m, config.validation_split)
    x_train, y_train = windows.samples[:cut], windows.targets[:cut]
    x_val, y_val = windows.samples[cut:], windows.targets[cut:]

    if params is None:
        params = init_parameters(spec, windows.samples.shape[2], config.seed, window=windows.window)
    else:
        params = params.copy()
    state = AdamState.fresh(params)
    shuffle_rng = stage_rng(config.seed, "shuffle")
    dropout_rng = stage_rng(config.seed, "dropout")
    stopper = EarlyStopping(config.patience)
    history = TrainHistory()

    logger.info("Training %s on %d windows (%d validation), up to %d epochs",
                spec.name or spec.describe(), cut, m - cut, config.max_epochs)
    for epoch in range(1, config.max_epochs + 1):
        order = shuffle_rng.permutation(cut)
        total = 0.0
        for batch, start in enumerate(range(0, cut, config.batch_size), start=1):
            idx = order[start:start + config.batch_size]
            pred, cache = forward(spec, params, x_train[idx], Mode.TRAIN, rng=dropout_rng)
            loss, d_pred = mse_loss(pred, y_train[idx])
            if not math.isfinite(loss):
                raise TrainingError("non-finite training loss", epoch=epoch, batch=batch)
            grads = backward(spec, params, cache, d_pred)
            try:
                adam_step(params, grads, state, config.learning_rate, config.adam_beta1,
                          config.adam_beta2, config.adam_epsilon)
            except TrainingError as exc:
                raise TrainingError(str(exc), epoch=epoch, batch=batch) from exc
            total += loss * len(idx)

        val_loss = evaluate_loss(spec, params, x_val, y_val)
        if not math.isfinite(val_loss):
            raise TrainingError("non-finite validation loss", epoch=epoch)
        history.train_loss.append(total / cut)
        history.val_loss.append(val_loss)
        logger.debug("epoch %d: loss=%.6g val_loss=%.6g", epoch, total / cut, val_loss)

        if stopper.update(epoch, val_loss, params):
            logger.info("Early stopping at epoch %d (best epoch %d, val_loss %.6g)",
                        epoch, stopper.best_epoch, stopper.best_loss)
            break

    history.best_epoch = stopper.best_epoch
    history.stopped_epoch = history.epochs
    return stopper.best_params, history


def write_history(history, path):
    write_csv_atomic(path, history.to_frame(), index=False, float_format="%.17g")
