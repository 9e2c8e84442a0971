"""Snapshot file format (magic "GRAFTSNAP1").

Layout: 10-byte magic, little-endian uint64 header length, UTF-8 JSON
header (epoch, worker id, tag, architecture summary, layer manifest), then
the payload: each layer's weights and bias as little-endian float64 in
row-major order, in manifest order. Round trips are bit-exact.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import (
    SnapshotManifestError,
    SnapshotMagicError,
    SnapshotTruncatedError,
)
from .model import CONV, DENSE, LayerWeights, ModelSnapshot

MAGIC = b"GRAFTSNAP1"
VERSION = 1
_DTYPE = np.dtype("<f8")


def _arch_summary(model: ModelSnapshot) -> dict:
    convs = [l for l in model.layers if l.kind == CONV]
    dense = [l for l in model.layers if l.kind == DENSE]
    return {
        "input_channels": model.layers[0].in_channels,
        "conv_channels": [l.out_channels for l in convs],
        "kernel_size": convs[0].weights.shape[2] if convs else 0,
        "class_count": dense[-1].out_channels if dense else 0,
    }


def write_snapshot(model: ModelSnapshot, path: str | Path) -> None:
    """Serialize a snapshot; see the module docstring for the layout."""
    header = {
        "version": VERSION,
        "epoch": model.epoch,
        "worker_id": model.worker_id,
        "tag": model.tag,
        "arch": _arch_summary(model),
        "layers": [
            {
                "name": l.name,
                "kind": l.kind,
                "weight_shape": list(l.weights.shape),
                "bias_shape": list(l.bias.shape),
            }
            for l in model.layers
        ],
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(len(blob).to_bytes(8, "little"))
        fh.write(blob)
        for layer in model.layers:
            fh.write(np.ascontiguousarray(layer.weights, dtype=_DTYPE).tobytes())
            fh.write(np.ascontiguousarray(layer.bias, dtype=_DTYPE).tobytes())


def read_snapshot(path: str | Path) -> ModelSnapshot:
    """Parse a snapshot file, validating magic, manifest, and payload size."""
    raw = Path(path).read_bytes()
    if len(raw) < len(MAGIC) or raw[: len(MAGIC)] != MAGIC:
        raise SnapshotMagicError(f"{path}: not a snapshot file (bad magic)")
    offset = len(MAGIC)
    if len(raw) < offset + 8:
        raise SnapshotTruncatedError(f"{path}: file ends inside the header length")
    header_len = int.from_bytes(raw[offset:offset + 8], "little")
    offset += 8
    if len(raw) < offset + header_len:
        raise SnapshotTruncatedError(f"{path}: file ends inside the header")
    try:
        header = json.loads(raw[offset:offset + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise SnapshotManifestError(f"{path}: header is not valid JSON: {exc}") from exc
    offset += header_len

    try:
        manifest = header["layers"]
        epoch = int(header["epoch"])
        worker_id = int(header["worker_id"])
        tag = str(header["tag"])
    except (KeyError, TypeError, ValueError) as exc:
        raise SnapshotManifestError(f"{path}: header missing required fields") from exc

    layers = []
    for entry in manifest:
        try:
            name = entry["name"]
            kind = entry["kind"]
            wshape = tuple(int(d) for d in entry["weight_shape"])
            bshape = tuple(int(d) for d in entry["bias_shape"])
        except (KeyError, TypeError, ValueError) as exc:
            raise SnapshotManifestError(f"{path}: malformed layer manifest") from exc
        if any(d < 1 for d in wshape + bshape):
            raise SnapshotManifestError(
                f"{path}: layer {name!r} declares non-positive dimensions"
            )

        def take(shape: tuple[int, ...]) -> np.ndarray:
            nonlocal offset
            end = offset + int(np.prod(shape)) * _DTYPE.itemsize
            if end > len(raw):
                raise SnapshotTruncatedError(
                    f"{path}: payload for layer {name!r} is truncated"
                )
            arr = np.frombuffer(raw[offset:end], dtype=_DTYPE).reshape(shape).copy()
            offset = end
            return arr

        weights = take(wshape)
        bias = take(bshape)
        try:
            layers.append(LayerWeights(name, kind, weights, bias))
        except Exception as exc:
            raise SnapshotManifestError(
                f"{path}: layer {name!r} manifest is inconsistent: {exc}"
            ) from exc
    if offset != len(raw):
        raise SnapshotManifestError(
            f"{path}: {len(raw) - offset} unexpected trailing bytes"
        )
    return ModelSnapshot(tuple(layers), epoch=epoch, worker_id=worker_id, tag=tag)
