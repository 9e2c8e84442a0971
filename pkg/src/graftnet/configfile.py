"""Experiment configuration as a flat ``key = value`` text format.

Dotted keys group into sections (experiment, arch, binning, graft, data,
worker.<i>). ``#`` starts a comment; blank lines are ignored. Unknown keys
are rejected by name, and ``parse_config(render_config(cfg)) == cfg``.
"""

from __future__ import annotations

from dataclasses import dataclass

from .coordinator import ExperimentConfig
from .criteria import FIXED, BinningConfig, InvalidFilterSelector
from .errors import ConfigError
from .grafting import GraftConfig
from .model import ArchSpec
from .train import TrainHyperparams

SYNTHETIC = "synthetic"
CIFAR10 = "cifar10"


@dataclass(frozen=True)
class DataConfig:
    """Where training/test data comes from (CLI-level concern)."""

    source: str = SYNTHETIC
    n_per_class: int = 100
    test_n_per_class: int = 50
    height: int = 8
    width: int = 8
    seed: int = 1234
    noise_level: float = 0.4
    cifar_train_files: tuple[str, ...] = ()
    cifar_test_files: tuple[str, ...] = ()

    def __post_init__(self):
        if self.source not in (SYNTHETIC, CIFAR10):
            raise ConfigError(f"unknown data source {self.source!r}")
        if self.source == CIFAR10 and not (
            self.cifar_train_files and self.cifar_test_files
        ):
            raise ConfigError("cifar10 data needs cifar_train_files and cifar_test_files")


@dataclass(frozen=True)
class RunConfig:
    experiment: ExperimentConfig
    data: DataConfig


def _parse_scalar(key: str, text: str, kind: str):
    try:
        if kind == "int":
            return int(text)
        if kind == "float":
            return float(text)
        if kind == "bool":
            if text == "true":
                return True
            if text == "false":
                return False
            raise ValueError(text)
        if kind == "floats":
            return tuple(float(p) for p in text.split(",") if p.strip())
        if kind == "ints":
            return tuple(int(p) for p in text.split(",") if p.strip())
        if kind == "strings":
            return tuple(p.strip() for p in text.split(",") if p.strip())
        return text
    except ValueError:
        raise ConfigError(f"config key {key!r}: cannot parse {text!r} as {kind}") from None


# key -> (section field, type). Worker keys are handled separately.
_SCHEMA = {
    "experiment.network_count": ("int",),
    "experiment.total_epochs": ("int",),
    "experiment.grafting_enabled": ("bool",),
    "experiment.grafting_period": ("int",),
    "experiment.topology": ("str",),
    "arch.input_channels": ("int",),
    "arch.conv_channels": ("ints",),
    "arch.kernel_size": ("int",),
    "arch.class_count": ("int",),
    "binning.bin_count": ("int",),
    "binning.range_mode": ("str",),
    "binning.range_lo": ("float",),
    "binning.range_hi": ("float",),
    "graft.scion_source": ("str",),
    "graft.criterion": ("str",),
    "graft.alpha_amplitude": ("float",),
    "graft.alpha_sensitivity": ("float",),
    "graft.noise_decay_base": ("float",),
    "graft.selector_mode": ("str",),
    "graft.selector_value": ("float",),
    "graft.weighting": ("str",),
    "graft.fixed_alpha": ("float",),
    "graft.granularity": ("str",),
    "graft.internal_mode": ("str",),
    "graft.layer_measure": ("str",),
    "data.source": ("str",),
    "data.n_per_class": ("int",),
    "data.test_n_per_class": ("int",),
    "data.height": ("int",),
    "data.width": ("int",),
    "data.seed": ("int",),
    "data.noise_level": ("float",),
    "data.cifar_train_files": ("strings",),
    "data.cifar_test_files": ("strings",),
}

_WORKER_SCHEMA = {
    "initial_lr": "float",
    "lr_schedule": "str",
    "schedule_params": "floats",
    "batch_size": "int",
    "data_seed": "int",
    "init_seed": "int",
    "epochs": "int",
    "momentum": "float",
    "weight_decay": "float",
}


def parse_config(text: str) -> RunConfig:
    """Parse config text; raises ConfigError naming any offending key."""
    values: dict[str, object] = {}
    worker_values: dict[int, dict[str, object]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"config line {lineno}: expected 'key = value', got {raw!r}")
        key, _, val = line.partition("=")
        key = key.strip()
        val = val.strip()
        if key.startswith("worker."):
            parts = key.split(".")
            if len(parts) != 3 or not parts[1].isdigit():
                raise ConfigError(f"unknown config key {key!r}")
            idx, fieldname = int(parts[1]), parts[2]
            if fieldname not in _WORKER_SCHEMA:
                raise ConfigError(f"unknown config key {key!r}")
            bucket = worker_values.setdefault(idx, {})
            if fieldname in bucket:
                raise ConfigError(f"duplicate config key {key!r}")
            bucket[fieldname] = _parse_scalar(key, val, _WORKER_SCHEMA[fieldname])
        else:
            if key not in _SCHEMA:
                raise ConfigError(f"unknown config key {key!r}")
            if key in values:
                raise ConfigError(f"duplicate config key {key!r}")
            values[key] = _parse_scalar(key, val, _SCHEMA[key][0])

    def need(key: str):
        if key not in values:
            raise ConfigError(f"missing required config key {key!r}")
        return values[key]

    def get(key: str, default):
        return values.get(key, default)

    network_count = need("experiment.network_count")
    total_epochs = need("experiment.total_epochs")

    arch = ArchSpec(
        input_channels=get("arch.input_channels", 1),
        conv_channels=get("arch.conv_channels", (16, 32)),
        kernel_size=get("arch.kernel_size", 3),
        class_count=get("arch.class_count", 3),
    )
    binning = BinningConfig(
        bin_count=get("binning.bin_count", 10),
        range_mode=get("binning.range_mode", "per_tensor_minmax"),
        range_lo=get("binning.range_lo", 0.0),
        range_hi=get("binning.range_hi", 0.0),
    )
    if binning.range_mode != FIXED and (
        "binning.range_lo" in values or "binning.range_hi" in values
    ):
        raise ConfigError("binning.range_lo/hi require range_mode = fixed")
    graft = GraftConfig(
        scion_source=get("graft.scion_source", "external"),
        criterion=get("graft.criterion", "entropy"),
        alpha_amplitude=get("graft.alpha_amplitude", 0.25),
        alpha_sensitivity=get("graft.alpha_sensitivity", 50.0),
        noise_decay_base=get("graft.noise_decay_base", 0.9),
        selector=InvalidFilterSelector(
            mode=get("graft.selector_mode", "bottom_fraction"),
            value=get("graft.selector_value", 0.2),
        ),
        weighting=get("graft.weighting", "adaptive"),
        fixed_alpha=get("graft.fixed_alpha", 0.5),
        granularity=get("graft.granularity", "layer_level"),
        internal_mode=get("graft.internal_mode", "add"),
        layer_measure=get("graft.layer_measure", "whole_layer"),
    )

    workers = []
    for i in range(network_count):
        bucket = worker_values.pop(i, {})
        if "initial_lr" not in bucket:
            raise ConfigError(f"missing required config key 'worker.{i}.initial_lr'")
        workers.append(
            TrainHyperparams(
                initial_lr=bucket["initial_lr"],
                lr_schedule=bucket.get("lr_schedule", "cosine"),
                schedule_params=bucket.get("schedule_params", ()),
                batch_size=bucket.get("batch_size", 16),
                data_seed=bucket.get("data_seed", i),
                init_seed=bucket.get("init_seed", i),
                epochs=bucket.get("epochs", total_epochs),
                momentum=bucket.get("momentum", 0.9),
                weight_decay=bucket.get("weight_decay", 0.0),
            )
        )
    if worker_values:
        stray = min(worker_values)
        raise ConfigError(
            f"config defines worker.{stray} but network_count is {network_count}"
        )

    experiment = ExperimentConfig(
        arch=arch,
        workers=tuple(workers),
        graft=graft,
        binning=binning,
        network_count=network_count,
        total_epochs=total_epochs,
        grafting_enabled=get("experiment.grafting_enabled", True),
        grafting_period=get("experiment.grafting_period", 1),
        topology=get("experiment.topology", "ring"),
    )
    data = DataConfig(
        source=get("data.source", SYNTHETIC),
        n_per_class=get("data.n_per_class", 100),
        test_n_per_class=get("data.test_n_per_class", 50),
        height=get("data.height", 8),
        width=get("data.width", 8),
        seed=get("data.seed", 1234),
        noise_level=get("data.noise_level", 0.4),
        cifar_train_files=get("data.cifar_train_files", ()),
        cifar_test_files=get("data.cifar_test_files", ()),
    )
    return RunConfig(experiment=experiment, data=data)


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ",".join(_fmt(v) for v in value)
    return str(value)


def render_config(cfg: RunConfig) -> str:
    """Render a RunConfig to text that parses back to an equal value."""
    e, d = cfg.experiment, cfg.data
    lines = [
        f"experiment.network_count = {e.network_count}",
        f"experiment.total_epochs = {e.total_epochs}",
        f"experiment.grafting_enabled = {_fmt(e.grafting_enabled)}",
        f"experiment.grafting_period = {e.grafting_period}",
        f"experiment.topology = {e.topology}",
        "",
        f"arch.input_channels = {e.arch.input_channels}",
        f"arch.conv_channels = {_fmt(e.arch.conv_channels)}",
        f"arch.kernel_size = {e.arch.kernel_size}",
        f"arch.class_count = {e.arch.class_count}",
        "",
        f"binning.bin_count = {e.binning.bin_count}",
        f"binning.range_mode = {e.binning.range_mode}",
    ]
    if e.binning.range_mode == FIXED:
        lines += [
            f"binning.range_lo = {_fmt(e.binning.range_lo)}",
            f"binning.range_hi = {_fmt(e.binning.range_hi)}",
        ]
    g = e.graft
    lines += [
        "",
        f"graft.scion_source = {g.scion_source}",
        f"graft.criterion = {g.criterion}",
        f"graft.alpha_amplitude = {_fmt(g.alpha_amplitude)}",
        f"graft.alpha_sensitivity = {_fmt(g.alpha_sensitivity)}",
        f"graft.noise_decay_base = {_fmt(g.noise_decay_base)}",
        f"graft.selector_mode = {g.selector.mode}",
        f"graft.selector_value = {_fmt(g.selector.value)}",
        f"graft.weighting = {g.weighting}",
        f"graft.fixed_alpha = {_fmt(g.fixed_alpha)}",
        f"graft.granularity = {g.granularity}",
        f"graft.internal_mode = {g.internal_mode}",
        f"graft.layer_measure = {g.layer_measure}",
        "",
        f"data.source = {d.source}",
        f"data.n_per_class = {d.n_per_class}",
        f"data.test_n_per_class = {d.test_n_per_class}",
        f"data.height = {d.height}",
        f"data.width = {d.width}",
        f"data.seed = {d.seed}",
        f"data.noise_level = {_fmt(d.noise_level)}",
    ]
    if d.cifar_train_files:
        lines.append(f"data.cifar_train_files = {_fmt(d.cifar_train_files)}")
    if d.cifar_test_files:
        lines.append(f"data.cifar_test_files = {_fmt(d.cifar_test_files)}")
    for i, hp in enumerate(e.workers):
        lines += [
            "",
            f"worker.{i}.initial_lr = {_fmt(hp.initial_lr)}",
            f"worker.{i}.lr_schedule = {hp.lr_schedule}",
            f"worker.{i}.schedule_params = {_fmt(hp.schedule_params)}",
            f"worker.{i}.batch_size = {hp.batch_size}",
            f"worker.{i}.data_seed = {hp.data_seed}",
            f"worker.{i}.init_seed = {hp.init_seed}",
            f"worker.{i}.epochs = {hp.epochs}",
            f"worker.{i}.momentum = {_fmt(hp.momentum)}",
            f"worker.{i}.weight_decay = {_fmt(hp.weight_decay)}",
        ]
    return "\n".join(lines) + "\n"
