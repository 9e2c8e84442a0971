"""graftnet: parallel network training with filter grafting.

Several networks train side by side with diversified hyperparameters; at
every epoch boundary each one blends its layer weights with a ring peer's,
weighted by an adaptive coefficient computed from the two layers'
information content. Weak (low-information) filters get re-activated
without any architecture change.
"""

from .coordinator import EpochRecord, ExperimentConfig, graft_step, run_experiment
from .criteria import (
    BinningConfig,
    DiscreteDistribution,
    InvalidFilterSelector,
    entropy_of_values,
    filter_entropy,
    invalid_filter_mask,
    joint_entropy,
    l1_norm_filter,
    layer_entropy,
    layer_info_sum,
)
from .data import SyntheticDataset, load_cifar10, make_synthetic
from .diagnostics import (
    DiagnosticsReport,
    build_report,
    invalid_location_iou,
    invalid_ratio,
    network_information,
)
from .grafting import (
    AlphaDecision,
    GraftConfig,
    adaptive_alpha,
    graft_external_pair,
    graft_internal,
    graft_noise,
    noise_sigma,
)
from .model import (
    ArchSpec,
    LayerWeights,
    ModelSnapshot,
    architecture_compatible,
    build_model,
    forward,
    grad_check,
)
from .snapshot_io import read_snapshot, write_snapshot
from .tensors import gaussian_sample, linear_blend, make_rng
from .train import TrainHyperparams, evaluate, learning_rate, train_baseline, train_epoch

__version__ = "0.1.0"

__all__ = [
    "AlphaDecision",
    "ArchSpec",
    "BinningConfig",
    "DiagnosticsReport",
    "DiscreteDistribution",
    "EpochRecord",
    "ExperimentConfig",
    "GraftConfig",
    "InvalidFilterSelector",
    "LayerWeights",
    "ModelSnapshot",
    "SyntheticDataset",
    "TrainHyperparams",
    "adaptive_alpha",
    "architecture_compatible",
    "build_model",
    "build_report",
    "entropy_of_values",
    "evaluate",
    "filter_entropy",
    "forward",
    "gaussian_sample",
    "grad_check",
    "graft_external_pair",
    "graft_internal",
    "graft_noise",
    "graft_step",
    "invalid_filter_mask",
    "invalid_location_iou",
    "invalid_ratio",
    "joint_entropy",
    "l1_norm_filter",
    "layer_entropy",
    "layer_info_sum",
    "learning_rate",
    "linear_blend",
    "load_cifar10",
    "make_rng",
    "make_synthetic",
    "network_information",
    "noise_sigma",
    "read_snapshot",
    "run_experiment",
    "train_baseline",
    "train_epoch",
    "write_snapshot",
]
