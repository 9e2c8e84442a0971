"""Snapshot file format: bit-exact round trips and corruption handling."""

import json

import numpy as np
import pytest
from conftest import random_snapshot, snapshots_equal

from graftnet.errors import (
    SnapshotMagicError,
    SnapshotManifestError,
    SnapshotTruncatedError,
)
from graftnet.snapshot_io import MAGIC, read_snapshot, write_snapshot


@pytest.fixture
def snapshot(rng):
    snap = random_snapshot(rng)
    return snap.with_layers(snap.layers, epoch=7, worker_id=2, tag="trained")


class TestRoundTrip:
    def test_bit_exact(self, tmp_path, snapshot):
        path = tmp_path / "model.gsnap"
        write_snapshot(snapshot, path)
        back = read_snapshot(path)
        assert snapshots_equal(snapshot, back)
        assert (back.epoch, back.worker_id, back.tag) == (7, 2, "trained")

    def test_rewrite_same_bytes(self, tmp_path, snapshot):
        a, b = tmp_path / "a.gsnap", tmp_path / "b.gsnap"
        write_snapshot(snapshot, a)
        write_snapshot(snapshot, b)
        assert a.read_bytes() == b.read_bytes()

    def test_negative_zero_and_extremes_survive(self, tmp_path, snapshot):
        layer = snapshot.layers[0]
        w = layer.weights.copy()
        w.flat[0] = -0.0
        w.flat[1] = 1e-308
        w.flat[2] = -1.7976931348623157e308
        patched = snapshot.with_layers(
            [layer.__class__(layer.name, layer.kind, w, layer.bias)] + list(snapshot.layers[1:])
        )
        path = tmp_path / "x.gsnap"
        write_snapshot(patched, path)
        back = read_snapshot(path)
        assert np.signbit(back.layers[0].weights.flat[0])
        assert back.layers[0].weights.flat[2] == -1.7976931348623157e308


class TestCorruption:
    def test_bad_magic(self, tmp_path, snapshot):
        path = tmp_path / "bad.gsnap"
        write_snapshot(snapshot, path)
        raw = bytearray(path.read_bytes())
        raw[0] ^= 0xFF
        path.write_bytes(bytes(raw))
        with pytest.raises(SnapshotMagicError):
            read_snapshot(path)

    def test_truncated_payload(self, tmp_path, snapshot):
        path = tmp_path / "trunc.gsnap"
        write_snapshot(snapshot, path)
        raw = path.read_bytes()
        path.write_bytes(raw[: len(raw) - 16])
        with pytest.raises(SnapshotTruncatedError):
            read_snapshot(path)

    def test_truncated_header(self, tmp_path):
        path = tmp_path / "header.gsnap"
        path.write_bytes(MAGIC + (1000).to_bytes(8, "little") + b"{}")
        with pytest.raises(SnapshotTruncatedError):
            read_snapshot(path)

    def test_non_json_header(self, tmp_path):
        blob = b"not json at all"
        path = tmp_path / "nj.gsnap"
        path.write_bytes(MAGIC + len(blob).to_bytes(8, "little") + blob)
        with pytest.raises(SnapshotManifestError):
            read_snapshot(path)

    def test_trailing_garbage(self, tmp_path, snapshot):
        path = tmp_path / "trail.gsnap"
        write_snapshot(snapshot, path)
        path.write_bytes(path.read_bytes() + b"\x00" * 8)
        with pytest.raises(SnapshotManifestError):
            read_snapshot(path)

    def test_manifest_shape_mismatch(self, tmp_path, snapshot):
        path = tmp_path / "shape.gsnap"
        write_snapshot(snapshot, path)
        raw = path.read_bytes()
        header_len = int.from_bytes(raw[len(MAGIC):len(MAGIC) + 8], "little")
        header = json.loads(raw[len(MAGIC) + 8:len(MAGIC) + 8 + header_len])
        header["layers"][0]["weight_shape"][0] += 1  # payload no longer fits
        blob = json.dumps(header, sort_keys=True).encode()
        path.write_bytes(
            MAGIC + len(blob).to_bytes(8, "little") + blob + raw[len(MAGIC) + 8 + header_len:]
        )
        with pytest.raises((SnapshotTruncatedError, SnapshotManifestError)):
            read_snapshot(path)

    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.gsnap"
        path.write_bytes(b"")
        with pytest.raises(SnapshotMagicError):
            read_snapshot(path)
