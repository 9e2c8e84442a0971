"""Small from-scratch convolutional classifier.

Architecture: a stack of same-padded stride-1 3x3 convolutions with ReLU,
global average pooling, and a final dense layer. The network is expressed
as an immutable ``ModelSnapshot`` (named weight tensors plus metadata);
forward and backward passes are pure functions of a snapshot and a batch.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels
from .errors import ConfigError, ShapeError
from .tensors import Rng, make_rng

CONV = "conv"
DENSE = "dense"


@dataclass(frozen=True)
class ArchSpec:
    """Shape of the toy classifier.

    The network is size-agnostic in the spatial dimensions (same padding
    plus global average pooling), so only channel structure is specified.
    """

    input_channels: int = 1
    conv_channels: tuple[int, ...] = (16, 32)
    kernel_size: int = 3
    class_count: int = 3

    def __post_init__(self):
        object.__setattr__(self, "conv_channels", tuple(int(c) for c in self.conv_channels))
        if self.input_channels < 1:
            raise ConfigError(f"input_channels must be >= 1, got {self.input_channels}")
        if len(self.conv_channels) < 2:
            raise ConfigError("at least two conv layers are required")
        if any(c < 1 for c in self.conv_channels):
            raise ConfigError(f"conv channel counts must be >= 1, got {self.conv_channels}")
        if self.kernel_size < 1 or self.kernel_size % 2 == 0:
            raise ConfigError(f"kernel_size must be odd and >= 1, got {self.kernel_size}")
        if self.class_count < 2:
            raise ConfigError(f"class_count must be >= 2, got {self.class_count}")


@dataclass(frozen=True)
class LayerWeights:
    """One weight-bearing layer: conv [out, in, k, k] or dense [out, in]."""

    name: str
    kind: str
    weights: np.ndarray
    bias: np.ndarray

    def __post_init__(self):
        if self.kind not in (CONV, DENSE):
            raise ConfigError(f"unknown layer kind {self.kind!r}")
        w, b = self.weights, self.bias
        if self.kind == CONV:
            if w.ndim != 4:
                raise ShapeError(f"conv weights must be 4-D, got shape {w.shape}")
            if w.shape[2] != w.shape[3]:
                raise ShapeError(f"conv kernel must be square, got {w.shape[2]}x{w.shape[3]}")
        else:
            if w.ndim != 2:
                raise ShapeError(f"dense weights must be 2-D, got shape {w.shape}")
        if min(w.shape[:2]) < 1:
            raise ShapeError(f"channel counts must be >= 1, got shape {w.shape}")
        if b.shape != (w.shape[0],):
            raise ShapeError(
                f"bias shape {b.shape} does not match {w.shape[0]} output channels"
            )

    @property
    def out_channels(self) -> int:
        return self.weights.shape[0]

    @property
    def in_channels(self) -> int:
        return self.weights.shape[1]

    def copy(self) -> LayerWeights:
        return replace(self, weights=self.weights.copy(), bias=self.bias.copy())


@dataclass(frozen=True)
class ModelSnapshot:
    """Ordered, named layer weights plus training metadata."""

    layers: tuple[LayerWeights, ...]
    epoch: int = 0
    worker_id: int = 0
    tag: str = ""

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))
        names = [l.name for l in self.layers]
        if len(set(names)) != len(names):
            raise ConfigError(f"layer names must be unique, got {names}")

    def layer(self, name: str) -> LayerWeights:
        for l in self.layers:
            if l.name == name:
                return l
        raise KeyError(name)

    def with_layers(self, layers, **meta) -> ModelSnapshot:
        return replace(self, layers=tuple(layers), **meta)


def first_architecture_mismatch(a: ModelSnapshot, b: ModelSnapshot) -> str | None:
    """Describe the first incompatibility between two snapshots, or None."""
    if len(a.layers) != len(b.layers):
        return f"layer count {len(a.layers)} vs {len(b.layers)}"
    for la, lb in zip(a.layers, b.layers):
        if la.name != lb.name:
            return f"layer name {la.name!r} vs {lb.name!r}"
        if la.kind != lb.kind:
            return f"layer {la.name!r}: kind {la.kind} vs {lb.kind}"
        if la.weights.shape != lb.weights.shape:
            return f"layer {la.name!r}: weight shape {la.weights.shape} vs {lb.weights.shape}"
        if la.bias.shape != lb.bias.shape:
            return f"layer {la.name!r}: bias shape {la.bias.shape} vs {lb.bias.shape}"
    return None


def architecture_compatible(a: ModelSnapshot, b: ModelSnapshot) -> bool:
    return first_architecture_mismatch(a, b) is None


def build_model(arch: ArchSpec, init_seed: int, *, worker_id: int = 0) -> ModelSnapshot:
    """Initialize a snapshot with fan-in-scaled gaussian weights, zero biases.

    std = sqrt(2 / fan_in), drawn from a PCG64 stream seeded by init_seed,
    so equal seeds give bit-identical snapshots.
    """
    rng = make_rng(init_seed)
    layers = []
    in_ch = arch.input_channels
    k = arch.kernel_size
    for i, out_ch in enumerate(arch.conv_channels):
        fan_in = in_ch * k * k
        w = rng.normal(0.0, np.sqrt(2.0 / fan_in), size=(out_ch, in_ch, k, k))
        layers.append(LayerWeights(f"conv{i + 1}", CONV, w, np.zeros(out_ch)))
        in_ch = out_ch
    w = rng.normal(0.0, np.sqrt(2.0 / in_ch), size=(arch.class_count, in_ch))
    layers.append(LayerWeights("dense", DENSE, w, np.zeros(arch.class_count)))
    return ModelSnapshot(tuple(layers), epoch=0, worker_id=worker_id, tag="init")


def _check_batch(model: ModelSnapshot, batch: np.ndarray) -> None:
    if batch.ndim != 4:
        raise ShapeError(f"batch must be [n, channels, h, w], got shape {batch.shape}")
    expect = model.layers[0].in_channels
    if batch.shape[1] != expect:
        raise ShapeError(
            f"batch has {batch.shape[1]} channels, model expects {expect}"
        )


def _forward_cached(model: ModelSnapshot, batch: np.ndarray):
    """Run the forward pass keeping per-layer inputs and pre-activations."""
    _check_batch(model, batch)
    conv_cache = []  # (input, pre_activation) per conv layer
    a = batch
    dense = model.layers[-1]
    if dense.kind != DENSE:
        raise ConfigError("last layer must be dense")
    for layer in model.layers[:-1]:
        if layer.kind != CONV:
            raise ConfigError("only the last layer may be dense")
        z = kernels.conv2d_forward(a, layer.weights, layer.bias, layer.weights.shape[2] // 2)
        conv_cache.append((a, z))
        a = np.maximum(z, 0.0)
    pooled = a.mean(axis=(2, 3))
    if pooled.shape[1] != dense.in_channels:
        raise ShapeError(
            f"pooled features {pooled.shape[1]} do not match dense input {dense.in_channels}"
        )
    logits = pooled @ dense.weights.T + dense.bias
    return logits, pooled, conv_cache


def forward(model: ModelSnapshot, batch: np.ndarray) -> np.ndarray:
    """Class logits for a batch, shape [n, class_count]."""
    logits, _, _ = _forward_cached(model, batch)
    return logits


def cross_entropy(logits: np.ndarray, labels: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean softmax cross-entropy and its gradient w.r.t. the logits."""
    n = logits.shape[0]
    shifted = logits - logits.max(axis=1, keepdims=True)
    log_z = np.log(np.exp(shifted).sum(axis=1))
    loss = float((log_z - shifted[np.arange(n), labels]).mean())
    probs = np.exp(shifted - log_z[:, None])
    probs[np.arange(n), labels] -= 1.0
    return loss, probs / n


def loss_and_grads(model: ModelSnapshot, batch: np.ndarray, labels: np.ndarray):
    """Mean cross-entropy loss and per-layer (grad_w, grad_b) in layer order."""
    logits, pooled, conv_cache = _forward_cached(model, batch)
    loss, glogits = cross_entropy(logits, labels)

    dense = model.layers[-1]
    gw_dense = glogits.T @ pooled
    gb_dense = glogits.sum(axis=0)
    gpooled = glogits @ dense.weights

    grads: list[tuple[np.ndarray, np.ndarray]] = [(gw_dense, gb_dense)]
    if conv_cache:
        _, h, w = conv_cache[-1][1].shape[1:]
        ga = np.broadcast_to(
            (gpooled / (h * w))[:, :, None, None], conv_cache[-1][1].shape
        )
        for layer, (x, z) in zip(reversed(model.layers[:-1]), reversed(conv_cache)):
            gz = np.where(z > 0.0, ga, 0.0)
            ga, gw, gb = kernels.conv2d_backward(x, layer.weights, gz, layer.weights.shape[2] // 2)
            grads.append((gw, gb))
    grads.reverse()
    return loss, grads


@dataclass
class GradCheckResult:
    """Finite-difference comparison summary."""

    max_rel_error: float
    per_layer: dict[str, float] = field(default_factory=dict)


def grad_check(
    model: ModelSnapshot,
    batch: np.ndarray,
    labels: np.ndarray,
    *,
    step: float = 1e-5,
    samples_per_tensor: int = 60,
    rng: Rng | None = None,
) -> GradCheckResult:
    """Compare analytic gradients against central finite differences.

    Samples parameter coordinates per tensor and reports the max relative
    error |a - f| / max(|a|, |f|); coordinates where both magnitudes are
    below 1e-10 contribute their absolute difference instead.
    """
    total = sum(l.weights.size + l.bias.size for l in model.layers)
    if total > 10_000:
        raise ConfigError(f"grad_check wants a small model (<= 1e4 params), got {total}")
    rng = rng if rng is not None else make_rng(0)

    _, grads = loss_and_grads(model, batch, labels)

    def loss_at(snapshot: ModelSnapshot) -> float:
        logits, _, _ = _forward_cached(snapshot, batch)
        return cross_entropy(logits, labels)[0]

    per_layer: dict[str, float] = {}
    for li, layer in enumerate(model.layers):
        worst = 0.0
        for which, analytic in zip(("weights", "bias"), grads[li]):
            tensor = getattr(layer, which)
            flat_n = tensor.size
            picks = min(samples_per_tensor, flat_n)
            idx = rng.choice(flat_n, size=picks, replace=False)
            for j in idx:
                j = int(j)
                pos = np.unravel_index(j, tensor.shape)
                layers = list(model.layers)

                def perturbed(delta: float) -> ModelSnapshot:
                    bumped = layer.copy()
                    getattr(bumped, which)[pos] += delta
                    layers[li] = bumped
                    return model.with_layers(layers)

                fd = (loss_at(perturbed(step)) - loss_at(perturbed(-step))) / (2.0 * step)
                a = float(analytic[pos])
                denom = max(abs(a), abs(fd))
                err = abs(a - fd) if denom < 1e-10 else abs(a - fd) / denom
                worst = max(worst, err)
        per_layer[layer.name] = worst
    return GradCheckResult(max(per_layer.values()), per_layer)
