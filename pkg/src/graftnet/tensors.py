"""Dense float64 tensors and seeded random number generation.

Tensors are plain ``numpy.ndarray`` values in C (row-major) order and are
treated as immutable once handed across a module boundary. Random streams
use NumPy's PCG64 generator, which is counter-based and produces the same
bit stream for the same seed on every platform.
"""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np

from .errors import DomainError, ShapeError

Rng = np.random.Generator


def make_rng(seed: int) -> Rng:
    """Create a PCG64 generator from a 64-bit seed."""
    return np.random.Generator(np.random.PCG64(seed))


def spawn_rng(seed: int, *stream: int) -> Rng:
    """Derive an independent generator for (seed, *stream).

    Distinct stream tuples give statistically independent streams, and the
    derivation is deterministic, so per-worker / per-purpose generators can
    be rebuilt from the experiment seeds alone.
    """
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, *stream])))


def _check_shape(shape: Sequence[int]) -> tuple[int, ...]:
    dims = tuple(int(d) for d in shape)
    if any(d <= 0 for d in dims):
        raise ShapeError(f"shape dimensions must be positive, got {dims}")
    return dims


def gaussian_sample(rng: Rng, mean: float, stddev: float, shape: Sequence[int]) -> np.ndarray:
    """Draw a tensor of i.i.d. normal samples.

    ``stddev == 0`` yields a constant tensor equal to ``mean``.
    """
    if stddev < 0:
        raise DomainError(f"stddev must be >= 0, got {stddev}")
    dims = _check_shape(shape)
    return rng.normal(loc=mean, scale=stddev, size=dims)


def linear_blend(a: np.ndarray, b: np.ndarray, alpha: float) -> np.ndarray:
    """Elementwise ``alpha * a + (1 - alpha) * b`` with ``alpha`` in (0, 1).

    Equal elements pass through bit-identically, so blending a snapshot
    with itself is an exact fixed point.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ShapeError(f"operands must share a shape, got {a.shape} vs {b.shape}")
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie strictly inside (0, 1), got {alpha}")
    return np.where(a == b, a, alpha * a + (1.0 - alpha) * b)
