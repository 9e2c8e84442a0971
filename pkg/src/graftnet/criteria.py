"""Information measures over filters and layers.

Two families: L1 norm (magnitude) and binned entropy (variation). Entropy
discretizes the weight values into ``bin_count`` equal-width bins over a
range (per-tensor min/max by default) and computes -sum p_k ln p_k. A
constant tensor therefore scores 0; equal occupancy of all bins scores
ln(bin_count), the maximum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DomainError, LayerKindError, ValidationError
from .model import CONV, LayerWeights

PER_TENSOR_MINMAX = "per_tensor_minmax"
FIXED = "fixed"

BOTTOM_FRACTION = "bottom_fraction"
ABSOLUTE_THRESHOLD = "absolute_threshold"


@dataclass(frozen=True)
class BinningConfig:
    """Histogram layout for entropy estimation (natural log)."""

    bin_count: int = 10
    range_mode: str = PER_TENSOR_MINMAX
    range_lo: float = 0.0
    range_hi: float = 0.0
    log_base: str = "natural"

    def __post_init__(self):
        if self.bin_count < 2:
            raise ConfigError(f"bin_count must be >= 2, got {self.bin_count}")
        if self.range_mode not in (PER_TENSOR_MINMAX, FIXED):
            raise ConfigError(f"unknown range_mode {self.range_mode!r}")
        if self.range_mode == FIXED:
            if not self.range_lo < self.range_hi:
                raise ConfigError(
                    f"fixed range needs lo < hi, got [{self.range_lo}, {self.range_hi}]"
                )
        else:
            # Canonicalize so equal behavior means equal values.
            object.__setattr__(self, "range_lo", 0.0)
            object.__setattr__(self, "range_hi", 0.0)
        if self.log_base != "natural":
            raise ConfigError("only natural log is supported")


@dataclass(frozen=True)
class InvalidFilterSelector:
    """How filters are marked invalid: bottom fraction or absolute cutoff."""

    mode: str = BOTTOM_FRACTION
    value: float = 0.2

    def __post_init__(self):
        if self.mode == BOTTOM_FRACTION:
            if not 0.0 < self.value < 1.0:
                raise ConfigError(f"fraction must be in (0, 1), got {self.value}")
        elif self.mode == ABSOLUTE_THRESHOLD:
            if self.value < 0.0:
                raise ConfigError(f"threshold must be >= 0, got {self.value}")
        else:
            raise ConfigError(f"unknown selector mode {self.mode!r}")


def l1_norm_filter(filter_block: np.ndarray) -> float:
    """Sum of absolute values over one filter's weight block."""
    if filter_block.size == 0:
        raise DomainError("filter must be non-empty")
    return float(np.abs(filter_block).sum())


def entropy_of_values(values: np.ndarray, cfg: BinningConfig) -> float:
    """Binned entropy of a flat value collection, in nats.

    Bin index for v is floor((v - lo) / (hi - lo) * bin_count), clipped into
    [0, bin_count - 1]; under a fixed range, out-of-range values land in the
    edge bins. A degenerate per-tensor range (max == min) scores 0.
    """
    flat = np.asarray(values, dtype=np.float64).ravel()
    if flat.size == 0:
        raise DomainError("entropy needs at least one value")
    if not np.isfinite(flat).all():
        raise DomainError("entropy inputs must be finite")
    if cfg.range_mode == PER_TENSOR_MINMAX:
        lo, hi = float(flat.min()), float(flat.max())
        if lo == hi:
            return 0.0
    else:
        lo, hi = cfg.range_lo, cfg.range_hi
    idx = np.floor((flat - lo) / (hi - lo) * cfg.bin_count).astype(np.int64)
    np.clip(idx, 0, cfg.bin_count - 1, out=idx)
    counts = np.bincount(idx, minlength=cfg.bin_count)
    total = flat.size
    h = 0.0
    for c in counts.tolist():  # ascending bin order; empty bins contribute 0
        if c:
            p = c / total
            h -= p * math.log(p)
    return h


def filter_entropy(filter_block: np.ndarray, cfg: BinningConfig) -> float:
    """Binned entropy of a single filter's weights."""
    return entropy_of_values(filter_block, cfg)


def layer_info_sum(layer: LayerWeights, cfg: BinningConfig) -> float:
    """Layer information as the sum of independent per-filter entropies.

    Ignores correlation between filters: duplicating a filter doubles its
    contribution.
    """
    if layer.kind != CONV:
        raise LayerKindError(f"layer {layer.name!r} is {layer.kind}, expected conv")
    return sum(filter_entropy(layer.weights[j], cfg) for j in range(layer.out_channels))


def layer_entropy(layer: LayerWeights, cfg: BinningConfig) -> float:
    """Layer information as one entropy over the whole weight tensor.

    Binning jointly makes duplicated filters leave bin proportions (and so
    the score) unchanged, unlike layer_info_sum.
    """
    return entropy_of_values(layer.weights, cfg)


def filter_scores(layer: LayerWeights, criterion: str, cfg: BinningConfig) -> np.ndarray:
    """Per-out-filter importance scores under the given criterion."""
    if layer.kind != CONV:
        raise LayerKindError(f"layer {layer.name!r} is {layer.kind}, expected conv")
    if criterion == "l1":
        return np.abs(layer.weights).sum(axis=tuple(range(1, layer.weights.ndim)))
    if criterion == "entropy":
        return np.array(
            [filter_entropy(layer.weights[j], cfg) for j in range(layer.out_channels)]
        )
    raise ConfigError(f"unknown criterion {criterion!r}")


def invalid_filter_mask(
    layer: LayerWeights,
    criterion: str,
    selector: InvalidFilterSelector,
    cfg: BinningConfig,
) -> np.ndarray:
    """Boolean mask over out-filters judged uninformative.

    bottom_fraction marks exactly floor(f * C) filters, lowest scores first;
    ties break toward the lower filter index. absolute_threshold marks
    scores strictly below the cutoff.
    """
    scores = filter_scores(layer, criterion, cfg)
    mask = np.zeros(layer.out_channels, dtype=bool)
    if selector.mode == BOTTOM_FRACTION:
        count = int(math.floor(selector.value * layer.out_channels))
        order = np.argsort(scores, kind="stable")
        mask[order[:count]] = True
    else:
        mask[scores < selector.value] = True
    return mask


@dataclass(frozen=True)
class DiscreteDistribution:
    """Finite distribution with distinct real support values."""

    support: tuple[float, ...]
    probs: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "support", tuple(float(s) for s in self.support))
        object.__setattr__(self, "probs", tuple(float(p) for p in self.probs))
        if len(self.support) != len(self.probs):
            raise ValidationError("support and probs must have equal length")
        if len(set(self.support)) != len(self.support):
            raise ValidationError("support values must be distinct")
        if any(p < 0 for p in self.probs):
            raise ValidationError("probabilities must be nonnegative")
        if abs(sum(self.probs) - 1.0) > 1e-12:
            raise ValidationError(f"probabilities sum to {sum(self.probs)}, expected 1")

    def entropy(self) -> float:
        return -sum(p * math.log(p) for p in self.probs if p > 0)


def joint_entropy(
    x: DiscreteDistribution, y: DiscreteDistribution, joint: np.ndarray
) -> float:
    """H(X, Y) = -sum p(x, y) ln p(x, y) from an explicit joint table.

    The table's marginals must match x and y within 1e-9.
    """
    table = np.asarray(joint, dtype=np.float64)
    if table.shape != (len(x.support), len(y.support)):
        raise ValidationError(
            f"joint table shape {table.shape} does not match supports "
            f"({len(x.support)}, {len(y.support)})"
        )
    if (table < 0).any():
        raise ValidationError("joint probabilities must be nonnegative")
    if not np.allclose(table.sum(axis=1), x.probs, atol=1e-9):
        raise ValidationError("joint row marginals do not match X")
    if not np.allclose(table.sum(axis=0), y.probs, atol=1e-9):
        raise ValidationError("joint column marginals do not match Y")
    mass = table[table > 0]
    return float(-(mass * np.log(mass)).sum())
