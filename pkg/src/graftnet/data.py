"""Synthetic classification data and an optional CIFAR-10 binary reader.

The synthetic task is oriented sinusoidal gratings plus gaussian noise:
class k gets orientation k * pi / class_count with a random phase per
sample. Classes are linearly separable well above chance, so a small CNN
can be trained on it in seconds.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, DataFormatError
from .tensors import make_rng

GRATING_CYCLES = 2.0  # full sine periods across the image width


@dataclass(frozen=True)
class SyntheticDataset:
    """Images [n, channels, h, w], integer labels in [0, class_count)."""

    images: np.ndarray
    labels: np.ndarray
    class_count: int
    generator_seed: int

    def __post_init__(self):
        if len(self.labels) != self.images.shape[0]:
            raise ConfigError("label count must match image count")
        if len(self.labels) and not (
            0 <= self.labels.min() and self.labels.max() < self.class_count
        ):
            raise ConfigError("labels must lie in [0, class_count)")

    def __len__(self) -> int:
        return self.images.shape[0]


def make_synthetic(
    class_count: int,
    n_per_class: int,
    height: int,
    width: int,
    seed: int,
    *,
    noise_level: float = 0.4,
) -> SyntheticDataset:
    """Generate a balanced oriented-gratings dataset. Same seed, same data."""
    if class_count < 2:
        raise ConfigError(f"class_count must be >= 2, got {class_count}")
    rng = make_rng(seed)
    ys, xs = np.mgrid[0:height, 0:width].astype(np.float64)
    freq = 2.0 * np.pi * GRATING_CYCLES / width

    images = np.empty((class_count * n_per_class, 1, height, width))
    labels = np.empty(class_count * n_per_class, dtype=np.int64)
    row = 0
    for k in range(class_count):
        theta = np.pi * k / class_count
        axis = np.cos(theta) * xs + np.sin(theta) * ys
        for _ in range(n_per_class):
            phase = rng.uniform(0.0, 2.0 * np.pi)
            img = np.sin(freq * axis + phase)
            img += rng.normal(0.0, noise_level, size=img.shape)
            images[row, 0] = img
            labels[row] = k
            row += 1
    order = rng.permutation(row)
    return SyntheticDataset(images[order], labels[order], class_count, seed)


CIFAR_RECORD = 3073  # 1 label byte + 3 * 32 * 32 pixel bytes
CIFAR_CLASSES = 10


def load_cifar10(paths: list[str | Path], *, seed: int = 0) -> SyntheticDataset:
    """Read CIFAR-10 binary batch files into a dataset.

    Pixels are scaled to [0, 1]; images come out as [n, 3, 32, 32].
    """
    chunks = []
    label_chunks = []
    for path in paths:
        raw = np.fromfile(str(path), dtype=np.uint8)
        if raw.size == 0 or raw.size % CIFAR_RECORD != 0:
            raise DataFormatError(
                f"{path}: size {raw.size} is not a multiple of {CIFAR_RECORD}-byte records"
            )
        records = raw.reshape(-1, CIFAR_RECORD)
        label_chunks.append(records[:, 0].astype(np.int64))
        chunks.append(records[:, 1:].reshape(-1, 3, 32, 32).astype(np.float64) / 255.0)
    labels = np.concatenate(label_chunks)
    if labels.max() >= CIFAR_CLASSES:
        raise DataFormatError(f"label byte {labels.max()} out of range for CIFAR-10")
    return SyntheticDataset(np.concatenate(chunks), labels, CIFAR_CLASSES, seed)
