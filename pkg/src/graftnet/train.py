"""SGD training loop with per-worker hyperparameters.

A worker's run is fully determined by (init_seed, data_seed, the
hyperparameters, and the epoch sequence): batch order for epoch e is a
permutation drawn from a generator seeded by (data_seed, e), so replays
and concurrent schedules agree bit-exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data import SyntheticDataset
from .errors import ConfigError, ShapeError, TrainingDivergenceError
from .model import ArchSpec, LayerWeights, ModelSnapshot, build_model, forward, loss_and_grads
from .tensors import spawn_rng

STEP = "step"
COSINE = "cosine"

# Stream tag separating batch-order draws from other uses of data_seed.
_ORDER_STREAM = 1


@dataclass(frozen=True)
class TrainHyperparams:
    initial_lr: float
    lr_schedule: str = COSINE
    schedule_params: tuple[float, ...] = ()
    batch_size: int = 16
    data_seed: int = 0
    init_seed: int = 0
    epochs: int = 1
    momentum: float = 0.9
    weight_decay: float = 0.0

    def __post_init__(self):
        object.__setattr__(
            self, "schedule_params", tuple(float(p) for p in self.schedule_params)
        )
        if self.initial_lr <= 0:
            raise ConfigError(f"initial_lr must be > 0, got {self.initial_lr}")
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.epochs < 1:
            raise ConfigError(f"epochs must be >= 1, got {self.epochs}")
        if not 0.0 <= self.momentum < 1.0:
            raise ConfigError(f"momentum must be in [0, 1), got {self.momentum}")
        if self.weight_decay < 0.0:
            raise ConfigError(f"weight_decay must be >= 0, got {self.weight_decay}")
        if self.lr_schedule not in (STEP, COSINE):
            raise ConfigError(f"unknown lr_schedule {self.lr_schedule!r}")
        if self.lr_schedule == STEP and len(self.schedule_params) < 1:
            raise ConfigError("step schedule needs params (factor, *milestone_epochs)")


def learning_rate(hp: TrainHyperparams, epoch_index: int) -> float:
    """Learning rate for an epoch.

    cosine: initial_lr * 0.5 * (1 + cos(pi * e / horizon)); the horizon is
    schedule_params[0] if given, else hp.epochs, so the rate stays positive
    through the final epoch.
    step: params are (factor, *milestones); the rate is multiplied by
    factor at each milestone epoch.
    """
    if hp.lr_schedule == COSINE:
        horizon = hp.schedule_params[0] if hp.schedule_params else float(hp.epochs)
        return hp.initial_lr * 0.5 * (1.0 + math.cos(math.pi * epoch_index / horizon))
    factor = hp.schedule_params[0]
    drops = sum(1 for m in hp.schedule_params[1:] if epoch_index >= m)
    return hp.initial_lr * factor ** drops


Velocity = list[tuple[np.ndarray, np.ndarray]]


def _zero_velocity(model: ModelSnapshot) -> Velocity:
    return [(np.zeros_like(l.weights), np.zeros_like(l.bias)) for l in model.layers]


def batch_order(data_seed: int, epoch_index: int, n: int) -> np.ndarray:
    """The epoch's sample permutation; a pure function of its arguments."""
    return spawn_rng(data_seed, _ORDER_STREAM, epoch_index).permutation(n)


def train_epoch(
    model: ModelSnapshot,
    data: SyntheticDataset,
    hp: TrainHyperparams,
    epoch_index: int,
    velocity: Velocity | None = None,
) -> tuple[ModelSnapshot, float, Velocity]:
    """One epoch of SGD with momentum and weight decay.

    Returns the updated snapshot (epoch incremented), the mean cross-entropy
    over the epoch, and the momentum state to thread into the next epoch.
    Raises TrainingDivergenceError if the loss goes non-finite.
    """
    if data.images.shape[1] != model.layers[0].in_channels:
        raise ShapeError(
            f"dataset has {data.images.shape[1]} channels, "
            f"model expects {model.layers[0].in_channels}"
        )
    lr = learning_rate(hp, epoch_index)
    weights = [l.weights.copy() for l in model.layers]
    biases = [l.bias.copy() for l in model.layers]
    vel = velocity if velocity is not None else _zero_velocity(model)
    vel = [(vw.copy(), vb.copy()) for vw, vb in vel]

    order = batch_order(hp.data_seed, epoch_index, len(data))
    loss_sum = 0.0
    current = model
    for bi, start in enumerate(range(0, len(data), hp.batch_size)):
        take = order[start:start + hp.batch_size]
        batch = data.images[take]
        labels = data.labels[take]
        current = model.with_layers(
            [
                LayerWeights(l.name, l.kind, w, b)
                for l, w, b in zip(model.layers, weights, biases)
            ]
        )
        loss, grads = loss_and_grads(current, batch, labels)
        if not math.isfinite(loss):
            raise TrainingDivergenceError(
                f"non-finite loss {loss} at epoch {epoch_index}, batch {bi}",
                epoch=epoch_index,
                batch_index=bi,
                loss=loss,
            )
        loss_sum += loss * len(take)
        for li, (gw, gb) in enumerate(grads):
            vw, vb = vel[li]
            vw *= hp.momentum
            vw += gw + hp.weight_decay * weights[li]
            vb *= hp.momentum
            vb += gb  # decay is conventionally not applied to biases
            weights[li] -= lr * vw
            biases[li] -= lr * vb

    updated = model.with_layers(
        [
            LayerWeights(l.name, l.kind, w, b)
            for l, w, b in zip(model.layers, weights, biases)
        ],
        epoch=model.epoch + 1,
        tag="trained",
    )
    return updated, loss_sum / len(data), vel


def evaluate(model: ModelSnapshot, data: SyntheticDataset, *, batch_size: int = 256) -> float:
    """Classification accuracy on a dataset."""
    hits = 0
    for start in range(0, len(data), batch_size):
        logits = forward(model, data.images[start:start + batch_size])
        hits += int((logits.argmax(axis=1) == data.labels[start:start + batch_size]).sum())
    return hits / len(data)


def train_baseline(
    arch: ArchSpec,
    data: SyntheticDataset,
    hp: TrainHyperparams,
    *,
    worker_id: int = 0,
) -> tuple[ModelSnapshot, list[float]]:
    """Plain single-network training over hp.epochs; no grafting."""
    model = build_model(arch, hp.init_seed, worker_id=worker_id)
    velocity = None
    losses = []
    for epoch in range(hp.epochs):
        model, loss, velocity = train_epoch(model, data, hp, epoch, velocity)
        losses.append(loss)
    return model, losses
