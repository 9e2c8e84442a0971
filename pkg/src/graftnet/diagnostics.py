"""Analysis of trained snapshots: weak-filter counts and information totals.

Produces plot-ready tabular data only; no plotting here.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .criteria import (
    BOTTOM_FRACTION,
    BinningConfig,
    InvalidFilterSelector,
    filter_entropy,
    invalid_filter_mask,
    layer_entropy,
    layer_info_sum,
)
from .errors import DomainError, GraftError
from .model import CONV, ModelSnapshot, first_architecture_mismatch

DEFAULT_THRESHOLDS = (1e-4, 1e-3, 1e-2, 1e-1)


def invalid_ratio(model: ModelSnapshot, thresholds) -> dict[float, float]:
    """Fraction of conv filters with L1 norm strictly below each threshold."""
    thresholds = [float(t) for t in thresholds]
    if any(t <= 0 for t in thresholds):
        raise DomainError(f"thresholds must be positive, got {thresholds}")
    if sorted(thresholds) != thresholds:
        raise DomainError(f"thresholds must be sorted ascending, got {thresholds}")
    norms = []
    for layer in model.layers:
        if layer.kind == CONV:
            norms.append(np.abs(layer.weights).sum(axis=(1, 2, 3)))
    all_norms = np.concatenate(norms)
    return {t: float((all_norms < t).mean()) for t in thresholds}


def network_information(model: ModelSnapshot, cfg: BinningConfig) -> float:
    """Sum of whole-tensor layer entropies over every weight-bearing layer."""
    return sum(layer_entropy(l, cfg) for l in model.layers)


def invalid_location_iou(
    a: ModelSnapshot, b: ModelSnapshot, fraction: float
) -> list[float]:
    """Per-conv-layer IoU of the two models' bottom-fraction filter sets.

    Selection is by L1 norm with the standard tie-break (lower index
    first). Two empty sets count as IoU 1.
    """
    mismatch = first_architecture_mismatch(a, b)
    if mismatch is not None:
        raise GraftError(f"incompatible snapshots: {mismatch}")
    selector = InvalidFilterSelector(BOTTOM_FRACTION, fraction)
    cfg = BinningConfig()
    out = []
    for la, lb in zip(a.layers, b.layers):
        if la.kind != CONV:
            continue
        set_a = set(np.flatnonzero(invalid_filter_mask(la, "l1", selector, cfg)))
        set_b = set(np.flatnonzero(invalid_filter_mask(lb, "l1", selector, cfg)))
        union = set_a | set_b
        out.append(1.0 if not union else len(set_a & set_b) / len(union))
    return out


@dataclass(frozen=True)
class LayerReport:
    name: str
    kind: str
    l1_per_filter: tuple[float, ...]
    filter_entropies: tuple[float, ...]
    entropy_filter_sum: float
    entropy_whole: float


@dataclass(frozen=True)
class DiagnosticsReport:
    """Everything the analyze command emits for one snapshot."""

    layers: tuple[LayerReport, ...]
    network_information: float
    invalid_ratio: dict[float, float]
    metadata: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "metadata": dict(self.metadata),
            "network_information": self.network_information,
            "invalid_ratio": {repr(t): r for t, r in self.invalid_ratio.items()},
            "layers": [
                {
                    "name": l.name,
                    "kind": l.kind,
                    "l1_per_filter": list(l.l1_per_filter),
                    "filter_entropies": list(l.filter_entropies),
                    "entropy_filter_sum": l.entropy_filter_sum,
                    "entropy_whole": l.entropy_whole,
                }
                for l in self.layers
            ],
        }


def build_report(
    model: ModelSnapshot,
    cfg: BinningConfig,
    thresholds=DEFAULT_THRESHOLDS,
    *,
    metadata: dict | None = None,
) -> DiagnosticsReport:
    """Collect per-layer statistics and the network-level summaries."""
    layers = []
    for layer in model.layers:
        if layer.kind == CONV:
            norms = tuple(
                float(v) for v in np.abs(layer.weights).sum(axis=(1, 2, 3))
            )
            fents = tuple(
                filter_entropy(layer.weights[j], cfg) for j in range(layer.out_channels)
            )
            fsum = layer_info_sum(layer, cfg)
        else:
            norms = tuple(float(v) for v in np.abs(layer.weights).sum(axis=1))
            fents = ()
            fsum = 0.0
        layers.append(
            LayerReport(
                name=layer.name,
                kind=layer.kind,
                l1_per_filter=norms,
                filter_entropies=fents,
                entropy_filter_sum=fsum,
                entropy_whole=layer_entropy(layer, cfg),
            )
        )
    meta = {
        "epoch": model.epoch,
        "worker_id": model.worker_id,
        "tag": model.tag,
        "bin_count": cfg.bin_count,
        "range_mode": cfg.range_mode,
    }
    meta.update(metadata or {})
    return DiagnosticsReport(
        layers=tuple(layers),
        network_information=network_information(model, cfg),
        invalid_ratio=invalid_ratio(model, thresholds),
        metadata=meta,
    )
