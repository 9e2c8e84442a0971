"""Exception hierarchy.

Every error carries a short machine-parseable ``category`` used by the CLI
to emit one-line failure reports (``error:<category>: <message>``).
"""

from __future__ import annotations


class GraftnetError(Exception):
    """Base class for all errors raised by this package."""

    category = "internal"


class ConfigError(GraftnetError):
    """Invalid configuration value, key, or combination."""

    category = "config"


class ShapeError(GraftnetError):
    """Tensor shape mismatch or invalid shape specification."""

    category = "shape"


class DomainError(GraftnetError):
    """Scalar argument outside its allowed domain."""

    category = "domain"


class LayerKindError(GraftnetError):
    """Operation applied to a layer kind it does not support."""

    category = "kind"


class ValidationError(GraftnetError):
    """Inconsistent probabilistic inputs (e.g. mismatched marginals)."""

    category = "validation"


class GraftError(GraftnetError):
    """Grafting precondition failure (incompatible snapshots, bad mask)."""

    category = "graft"


class TrainingDivergenceError(GraftnetError):
    """Non-finite loss during training. Carries a diagnostic payload."""

    category = "training"

    def __init__(self, message: str, *, worker_id: int | None = None,
                 epoch: int | None = None, batch_index: int | None = None,
                 loss: float | None = None):
        super().__init__(message)
        self.worker_id = worker_id
        self.epoch = epoch
        self.batch_index = batch_index
        self.loss = loss


class DataFormatError(GraftnetError):
    """Malformed external data file (e.g. CIFAR-10 binary batches)."""

    category = "data"


class SnapshotFormatError(GraftnetError):
    """Base class for snapshot-file parse failures."""

    category = "snapshot"


class SnapshotMagicError(SnapshotFormatError):
    """File does not start with the snapshot magic string."""


class SnapshotTruncatedError(SnapshotFormatError):
    """File ends before the declared payload is complete."""


class SnapshotManifestError(SnapshotFormatError):
    """Header manifest is malformed or inconsistent with the payload."""
