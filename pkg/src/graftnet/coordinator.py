"""Multi-network training schedule.

K workers train one epoch each, meet at a barrier, and exchange weights:
worker k is grafted from worker (k - 1) mod K (ring topology). Grafting
reads only the frozen pre-graft snapshot vector, so the result does not
depend on the order workers are processed, and a threaded run is
bit-identical to the sequential reference executor.
"""

from __future__ import annotations

import logging
import threading
from dataclasses import dataclass, field

from .criteria import BinningConfig, layer_entropy
from .data import SyntheticDataset
from .errors import ConfigError, GraftError, GraftnetError
from .grafting import (
    EXTERNAL,
    INTERNAL,
    NOISE,
    AlphaDecision,
    GraftConfig,
    graft_external_pair,
    graft_internal,
    graft_noise,
)
from .model import ArchSpec, ModelSnapshot, build_model, first_architecture_mismatch
from .tensors import Rng, spawn_rng
from .train import TrainHyperparams, evaluate, train_epoch

log = logging.getLogger(__name__)

RING = "ring"

SEQUENTIAL = "sequential"
THREADED = "threaded"

# Stream tag for the per-worker noise-scion generators.
_NOISE_STREAM = 2


@dataclass(frozen=True)
class ExperimentConfig:
    arch: ArchSpec
    workers: tuple[TrainHyperparams, ...]
    graft: GraftConfig = GraftConfig()
    binning: BinningConfig = BinningConfig()
    network_count: int = 0
    total_epochs: int = 1
    grafting_enabled: bool = True
    grafting_period: int = 1
    topology: str = RING

    def __post_init__(self):
        object.__setattr__(self, "workers", tuple(self.workers))
        if self.network_count == 0:
            object.__setattr__(self, "network_count", len(self.workers))
        validate_experiment(self)


def validate_experiment(cfg: ExperimentConfig) -> None:
    """Reject invalid configurations before any training starts."""
    k = cfg.network_count
    if k < 1:
        raise ConfigError(f"network_count must be >= 1, got {k}")
    if len(cfg.workers) != k:
        raise ConfigError(
            f"got {len(cfg.workers)} worker hyperparameter sets for network_count {k}"
        )
    if cfg.topology != RING:
        raise ConfigError(f"unknown topology {cfg.topology!r}")
    if cfg.total_epochs < 1:
        raise ConfigError(f"total_epochs must be >= 1, got {cfg.total_epochs}")
    if cfg.grafting_period < 1:
        raise ConfigError(f"grafting_period must be >= 1, got {cfg.grafting_period}")
    if cfg.grafting_enabled and cfg.graft.scion_source == EXTERNAL and k < 2:
        raise ConfigError("external scions need at least 2 networks")
    for hp in cfg.workers:
        if hp.epochs != cfg.total_epochs:
            raise ConfigError(
                f"worker epochs {hp.epochs} must equal total_epochs {cfg.total_epochs}"
            )
    if k >= 2:
        seeds = {hp.data_seed for hp in cfg.workers}
        lrs = {hp.initial_lr for hp in cfg.workers}
        if len(seeds) == 1 and len(lrs) == 1:
            log.warning(
                "workers share data_seed and initial_lr; "
                "diversify at least one for grafting to help"
            )


@dataclass(frozen=True)
class EpochRecord:
    """Per-worker state at the end of one epoch (after any grafting)."""

    epoch: int
    worker_id: int
    train_loss: float
    test_accuracy: float
    layer_entropies: dict[str, float] = field(default_factory=dict)
    alphas: tuple[AlphaDecision, ...] = ()

    @property
    def network_information(self) -> float:
        return sum(self.layer_entropies.values())


def _noise_rngs(cfg: ExperimentConfig) -> list[Rng]:
    return [spawn_rng(hp.init_seed, _NOISE_STREAM) for hp in cfg.workers]


def graft_step(
    pre_graft: list[ModelSnapshot],
    cfg: ExperimentConfig,
    *,
    epoch: int = 0,
    rngs: list[Rng] | None = None,
    order: list[int] | None = None,
) -> tuple[list[ModelSnapshot], list[tuple[AlphaDecision, ...]]]:
    """Graft every worker once from the frozen pre-graft snapshot vector.

    Worker k reads only pre_graft[k] and (for external scions) its ring
    peer pre_graft[(k - 1) mod K]; ``order`` merely schedules the
    computation and cannot change the result.
    """
    k = len(pre_graft)
    for i in range(1, k):
        mismatch = first_architecture_mismatch(pre_graft[0], pre_graft[i])
        if mismatch is not None:
            raise GraftError(f"worker {i} incompatible with worker 0: {mismatch}")
    if cfg.graft.scion_source == EXTERNAL and k < 2:
        raise ConfigError("external scions need at least 2 networks")
    if cfg.graft.scion_source == NOISE and rngs is None:
        raise ConfigError("noise scions need one rng per worker")

    out: list[ModelSnapshot | None] = [None] * k
    decisions: list[tuple[AlphaDecision, ...]] = [()] * k
    for i in (order if order is not None else range(k)):
        if cfg.graft.scion_source == EXTERNAL:
            peer = pre_graft[(i - 1) % k]
            out[i], decisions[i] = graft_external_pair(
                pre_graft[i], peer, cfg.graft, cfg.binning
            )
        elif cfg.graft.scion_source == INTERNAL:
            out[i] = graft_internal(pre_graft[i], cfg.graft, cfg.binning)
        else:
            out[i] = graft_noise(pre_graft[i], epoch, cfg.graft, rngs[i], cfg.binning)
    return out, decisions


def _epoch_record(
    cfg: ExperimentConfig,
    epoch: int,
    worker_id: int,
    model: ModelSnapshot,
    train_loss: float,
    test_data: SyntheticDataset,
    alphas: tuple[AlphaDecision, ...],
) -> EpochRecord:
    entropies = {l.name: layer_entropy(l, cfg.binning) for l in model.layers}
    return EpochRecord(
        epoch=epoch,
        worker_id=worker_id,
        train_loss=train_loss,
        test_accuracy=evaluate(model, test_data),
        layer_entropies=entropies,
        alphas=alphas,
    )


def _graft_due(cfg: ExperimentConfig, epoch: int) -> bool:
    return cfg.grafting_enabled and (epoch + 1) % cfg.grafting_period == 0


def run_experiment(
    cfg: ExperimentConfig,
    data: SyntheticDataset,
    test_data: SyntheticDataset,
    *,
    mode: str = THREADED,
) -> tuple[list[ModelSnapshot], list[EpochRecord]]:
    """Train K networks with the grafting schedule; returns final snapshots
    and one EpochRecord per (epoch, worker).

    ``mode`` selects the threaded executor or the sequential reference; the
    two produce bit-identical snapshots and records.
    """
    validate_experiment(cfg)
    if mode == SEQUENTIAL:
        return _run_sequential(cfg, data, test_data)
    if mode == THREADED:
        return _run_threaded(cfg, data, test_data)
    raise ConfigError(f"unknown mode {mode!r}")


def _run_sequential(cfg, data, test_data):
    k = cfg.network_count
    models = [
        build_model(cfg.arch, hp.init_seed, worker_id=i)
        for i, hp in enumerate(cfg.workers)
    ]
    velocities = [None] * k
    rngs = _noise_rngs(cfg)
    records: list[EpochRecord] = []
    for epoch in range(cfg.total_epochs):
        losses = []
        for i in range(k):
            try:
                models[i], loss, velocities[i] = train_epoch(
                    models[i], data, cfg.workers[i], epoch, velocities[i]
                )
            except GraftnetError as exc:
                raise _annotate(exc, i, epoch)
            losses.append(loss)
        decisions = [()] * k
        if _graft_due(cfg, epoch):
            models, decisions = graft_step(models, cfg, epoch=epoch, rngs=rngs)
        for i in range(k):
            records.append(
                _epoch_record(cfg, epoch, i, models[i], losses[i], test_data, decisions[i])
            )
    return models, records


def _annotate(exc: GraftnetError, worker_id: int, epoch: int) -> GraftnetError:
    if hasattr(exc, "worker_id"):
        exc.worker_id = worker_id
        exc.epoch = epoch
    return exc


def _run_threaded(cfg, data, test_data):
    """worker_loop per network: train, publish, barrier, receive, record."""
    k = cfg.network_count
    published: list[ModelSnapshot | None] = [None] * k
    received: list[ModelSnapshot | None] = [None] * k
    decisions: list[tuple[AlphaDecision, ...]] = [()] * k
    finals: list[ModelSnapshot | None] = [None] * k
    records: list[EpochRecord] = []
    records_lock = threading.Lock()
    failures: list[Exception] = []
    rngs = _noise_rngs(cfg)
    epoch_box = {"value": 0}

    def exchange():
        # Runs in exactly one thread per barrier release, between all
        # publishes and all receives: the snapshot vector is frozen here.
        epoch = epoch_box["value"]
        try:
            if _graft_due(cfg, epoch):
                grafted, dec = graft_step(published, cfg, epoch=epoch, rngs=rngs)
            else:
                grafted, dec = list(published), [()] * k
        except GraftnetError as exc:
            failures.append(exc)
            raise
        received[:] = grafted
        decisions[:] = dec
        epoch_box["value"] = epoch + 1

    barrier = threading.Barrier(k, action=exchange)

    def worker_loop(worker_id: int):
        hp = cfg.workers[worker_id]
        epoch = 0
        try:
            model = build_model(cfg.arch, hp.init_seed, worker_id=worker_id)
            velocity = None
            for epoch in range(cfg.total_epochs):
                model, loss, velocity = train_epoch(model, data, hp, epoch, velocity)
                published[worker_id] = model
                barrier.wait()
                model = received[worker_id]
                record = _epoch_record(
                    cfg, epoch, worker_id, model, loss, test_data, decisions[worker_id]
                )
                with records_lock:
                    records.append(record)
            finals[worker_id] = model
        except threading.BrokenBarrierError:
            pass  # a peer failed; its error is already recorded
        except GraftnetError as exc:
            failures.append(_annotate(exc, worker_id, epoch))
            barrier.abort()
        except Exception as exc:  # never leave peers stuck at the barrier
            failures.append(exc)
            barrier.abort()

    threads = [
        threading.Thread(target=worker_loop, args=(i,), name=f"graftnet-worker-{i}")
        for i in range(k)
    ]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    if failures:
        raise failures[0]
    records.sort(key=lambda r: (r.epoch, r.worker_id))
    return list(finals), records
