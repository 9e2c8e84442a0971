"""Shared test helpers."""

import numpy as np
import pytest

from graftnet.model import CONV, DENSE, LayerWeights, ModelSnapshot


def random_snapshot(rng, conv_channels=(4, 6), in_channels=1, classes=3, k=3, scale=1.0):
    """A random but well-formed model snapshot."""
    layers = []
    cin = in_channels
    for i, cout in enumerate(conv_channels):
        layers.append(
            LayerWeights(
                f"conv{i + 1}",
                CONV,
                scale * rng.normal(size=(cout, cin, k, k)),
                scale * rng.normal(size=cout),
            )
        )
        cin = cout
    layers.append(
        LayerWeights(
            "dense", DENSE, scale * rng.normal(size=(classes, cin)), scale * rng.normal(size=classes)
        )
    )
    return ModelSnapshot(tuple(layers))


def snapshots_equal(a: ModelSnapshot, b: ModelSnapshot) -> bool:
    return len(a.layers) == len(b.layers) and all(
        la.name == lb.name
        and la.kind == lb.kind
        and (la.weights == lb.weights).all()
        and (la.bias == lb.bias).all()
        for la, lb in zip(a.layers, b.layers)
    )


def max_snapshot_diff(a: ModelSnapshot, b: ModelSnapshot) -> float:
    return max(
        max(np.abs(la.weights - lb.weights).max(), np.abs(la.bias - lb.bias).max())
        for la, lb in zip(a.layers, b.layers)
    )


def same_architecture(a: ModelSnapshot, b: ModelSnapshot) -> bool:
    return len(a.layers) == len(b.layers) and all(
        la.name == lb.name
        and la.kind == lb.kind
        and la.weights.shape == lb.weights.shape
        and la.bias.shape == lb.bias.shape
        for la, lb in zip(a.layers, b.layers)
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def pytest_terminal_summary(terminalreporter):
    """Echo the acceptance criterion verdicts past output capture."""
    try:
        from test_acceptance import RESULT_LINES
    except ImportError:
        return
    if RESULT_LINES:
        terminalreporter.section("acceptance criteria")
        for line in RESULT_LINES:
            terminalreporter.write_line(line)
