"""Grafting operators: re-activating weak filters without changing shape.

Three scion sources:
  noise    -- add gaussian noise (stddev decaying per epoch) to invalid filters
  internal -- transplant the strongest filters of a layer into its weakest
  external -- blend a whole layer with a peer network's layer, weighted by
              an adaptive coefficient from the two layers' information

All operators are pure: they take snapshots and return new snapshots with
identical layer names, kinds, and shapes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .criteria import (
    BinningConfig,
    InvalidFilterSelector,
    invalid_filter_mask,
    layer_entropy,
    layer_info_sum,
)
from .errors import ConfigError, GraftError
from .model import (
    CONV,
    LayerWeights,
    ModelSnapshot,
    first_architecture_mismatch,
)
from .tensors import Rng, gaussian_sample, linear_blend

NOISE = "noise"
INTERNAL = "internal"
EXTERNAL = "external"

ADAPTIVE = "adaptive"
FIXED_WEIGHTING = "fixed"

LAYER_LEVEL = "layer_level"
FILTER_LEVEL = "filter_level"

ADD = "add"
REPLACE = "replace"

WHOLE_LAYER = "whole_layer"
FILTER_SUM = "filter_sum"

MAX_ALPHA_AMPLITUDE = 1.0 / math.pi  # keeps alpha strictly inside (0, 1)


@dataclass(frozen=True)
class GraftConfig:
    """Grafting hyperparameters.

    alpha_amplitude and alpha_sensitivity shape the adaptive coefficient
    alpha = amplitude * arctan(sensitivity * (h_self - h_peer)) + 0.5;
    amplitude < 1/pi guarantees each network keeps part of its own weights.
    """

    scion_source: str = EXTERNAL
    criterion: str = "entropy"
    alpha_amplitude: float = 0.25
    alpha_sensitivity: float = 50.0
    noise_decay_base: float = 0.9
    selector: InvalidFilterSelector = InvalidFilterSelector()
    weighting: str = ADAPTIVE
    fixed_alpha: float = 0.5
    granularity: str = LAYER_LEVEL
    internal_mode: str = ADD
    layer_measure: str = WHOLE_LAYER

    def __post_init__(self):
        if self.scion_source not in (NOISE, INTERNAL, EXTERNAL):
            raise ConfigError(f"unknown scion_source {self.scion_source!r}")
        if self.criterion not in ("l1", "entropy"):
            raise ConfigError(f"unknown criterion {self.criterion!r}")
        if not 0.0 < self.alpha_amplitude < MAX_ALPHA_AMPLITUDE:
            raise ConfigError(
                f"alpha_amplitude must be in (0, 1/pi), got {self.alpha_amplitude}"
            )
        if self.alpha_sensitivity <= 0.0:
            raise ConfigError(
                f"alpha_sensitivity must be > 0, got {self.alpha_sensitivity}"
            )
        if not 0.0 < self.noise_decay_base < 1.0:
            raise ConfigError(
                f"noise_decay_base must be in (0, 1), got {self.noise_decay_base}"
            )
        if self.weighting not in (ADAPTIVE, FIXED_WEIGHTING):
            raise ConfigError(f"unknown weighting {self.weighting!r}")
        if not 0.0 < self.fixed_alpha < 1.0:
            raise ConfigError(f"fixed_alpha must be in (0, 1), got {self.fixed_alpha}")
        if self.granularity not in (LAYER_LEVEL, FILTER_LEVEL):
            raise ConfigError(f"unknown granularity {self.granularity!r}")
        if self.internal_mode not in (ADD, REPLACE):
            raise ConfigError(f"unknown internal_mode {self.internal_mode!r}")
        if self.layer_measure not in (WHOLE_LAYER, FILTER_SUM):
            raise ConfigError(f"unknown layer_measure {self.layer_measure!r}")


@dataclass(frozen=True)
class AlphaDecision:
    """Record of one layer's blend: the two information scores and alpha."""

    layer_name: str
    h_self: float
    h_peer: float
    alpha: float


def adaptive_alpha(h_self: float, h_peer: float, amplitude: float, sensitivity: float) -> float:
    """Self-weight for blending: amplitude * arctan(sensitivity * gap) + 0.5.

    Equal information gives exactly 0.5; the result stays strictly inside
    (0.5 - amplitude*pi/2, 0.5 + amplitude*pi/2) and increases with the
    information advantage of the network being updated.
    """
    if not 0.0 < amplitude < MAX_ALPHA_AMPLITUDE:
        raise ConfigError(f"amplitude must be in (0, 1/pi), got {amplitude}")
    if sensitivity <= 0.0:
        raise ConfigError(f"sensitivity must be > 0, got {sensitivity}")
    return amplitude * math.atan(sensitivity * (h_self - h_peer)) + 0.5


def noise_sigma(t: int, base: float) -> float:
    """Noise stddev at epoch t: base ** t, strictly decreasing, sigma_0 = 1."""
    if not 0.0 < base < 1.0:
        raise ConfigError(f"noise decay base must be in (0, 1), got {base}")
    if t < 0:
        raise ConfigError(f"epoch must be >= 0, got {t}")
    return base ** t


def layer_information(
    layer: LayerWeights, criterion: str, bin_cfg: BinningConfig, layer_measure: str
) -> float:
    """Information score of a whole layer under the configured criterion.

    l1: sum of absolute weights. entropy: whole-tensor binned entropy, or
    the per-filter entropy sum for conv layers when layer_measure is
    filter_sum (dense layers always use the whole-tensor form).
    """
    if criterion == "l1":
        return float(np.abs(layer.weights).sum())
    if layer_measure == FILTER_SUM and layer.kind == CONV:
        return layer_info_sum(layer, bin_cfg)
    return layer_entropy(layer, bin_cfg)


def graft_noise(
    model: ModelSnapshot,
    epoch: int,
    cfg: GraftConfig,
    rng: Rng,
    bin_cfg: BinningConfig = BinningConfig(),
) -> ModelSnapshot:
    """Add decaying gaussian noise to each conv layer's invalid filters.

    Noise is drawn per invalid filter in (layer order, ascending filter
    index), so a given rng state determines the result.
    """
    sigma = noise_sigma(epoch, cfg.noise_decay_base)
    layers = []
    for layer in model.layers:
        if layer.kind != CONV:
            layers.append(layer)
            continue
        mask = invalid_filter_mask(layer, cfg.criterion, cfg.selector, bin_cfg)
        if not mask.any():
            layers.append(layer)
            continue
        w = layer.weights.copy()
        for j in np.flatnonzero(mask):
            w[j] += gaussian_sample(rng, 0.0, sigma, w[j].shape)
        layers.append(LayerWeights(layer.name, layer.kind, w, layer.bias.copy()))
    return model.with_layers(layers, tag="grafted")


def graft_internal(
    model: ModelSnapshot,
    cfg: GraftConfig,
    bin_cfg: BinningConfig = BinningConfig(),
) -> ModelSnapshot:
    """Transplant strong filters into weak ones inside each conv layer.

    Rootstocks are the invalid filters ordered by ascending L1 norm; donors
    are the strongest valid filters by descending L1 norm (ties toward the
    lower index). Pair i gets donor i either added onto it or copied over
    it, per cfg.internal_mode. Biases are untouched.
    """
    layers = []
    for layer in model.layers:
        if layer.kind != CONV:
            layers.append(layer)
            continue
        mask = invalid_filter_mask(layer, cfg.criterion, cfg.selector, bin_cfg)
        count = int(mask.sum())
        if count == 0:
            layers.append(layer)
            continue
        if count > layer.out_channels - count:
            raise GraftError(
                f"layer {layer.name!r}: {count} invalid filters exceed "
                f"{layer.out_channels - count} valid ones"
            )
        norms = np.abs(layer.weights).sum(axis=(1, 2, 3))
        invalid = np.flatnonzero(mask)
        valid = np.flatnonzero(~mask)
        rootstocks = invalid[np.argsort(norms[invalid], kind="stable")]
        donors = valid[np.argsort(-norms[valid], kind="stable")][:count]

        w = layer.weights.copy()
        source = layer.weights
        for root, donor in zip(rootstocks, donors):
            if cfg.internal_mode == ADD:
                w[root] = source[root] + source[donor]
            else:
                w[root] = source[donor]
        layers.append(LayerWeights(layer.name, layer.kind, w, layer.bias.copy()))
    return model.with_layers(layers, tag="grafted")


def _blend_alpha(
    self_layer: LayerWeights,
    peer_layer: LayerWeights,
    cfg: GraftConfig,
    bin_cfg: BinningConfig,
) -> AlphaDecision:
    h_self = layer_information(self_layer, cfg.criterion, bin_cfg, cfg.layer_measure)
    h_peer = layer_information(peer_layer, cfg.criterion, bin_cfg, cfg.layer_measure)
    if cfg.weighting == ADAPTIVE:
        alpha = adaptive_alpha(h_self, h_peer, cfg.alpha_amplitude, cfg.alpha_sensitivity)
    else:
        alpha = cfg.fixed_alpha
    return AlphaDecision(self_layer.name, h_self, h_peer, alpha)


def graft_external_pair(
    self_model: ModelSnapshot,
    peer: ModelSnapshot,
    cfg: GraftConfig,
    bin_cfg: BinningConfig,
) -> tuple[ModelSnapshot, tuple[AlphaDecision, ...]]:
    """Blend every layer of self_model with the peer's matching layer.

    Layer level (the default): new = alpha * self + (1 - alpha) * peer for
    the full weight tensor and bias. Filter level restricts the blend to
    the rows of self's invalid out-filters (conv layers only; dense layers
    still blend whole). Both snapshots must be architecture-compatible.
    """
    mismatch = first_architecture_mismatch(self_model, peer)
    if mismatch is not None:
        raise GraftError(f"incompatible snapshots: {mismatch}")
    layers = []
    decisions = []
    for mine, theirs in zip(self_model.layers, peer.layers):
        decision = _blend_alpha(mine, theirs, cfg, bin_cfg)
        alpha = decision.alpha
        if cfg.granularity == FILTER_LEVEL and mine.kind == CONV:
            mask = invalid_filter_mask(mine, cfg.criterion, cfg.selector, bin_cfg)
            w = mine.weights.copy()
            b = mine.bias.copy()
            for j in np.flatnonzero(mask):
                w[j] = linear_blend(mine.weights[j], theirs.weights[j], alpha)
                b[j] = alpha * mine.bias[j] + (1.0 - alpha) * theirs.bias[j]
        else:
            w = linear_blend(mine.weights, theirs.weights, alpha)
            b = linear_blend(mine.bias, theirs.bias, alpha)
        layers.append(LayerWeights(mine.name, mine.kind, w, b))
        decisions.append(decision)
    grafted = self_model.with_layers(layers, tag="grafted")
    return grafted, tuple(decisions)
