"""Benchmark the compiled convolution kernels against the NumPy fallback.

Times forward and backward passes on the toy-training shapes plus a couple
of heavier ones, then a full training epoch through each backend.

Usage: python benchmarks/bench_kernels.py [--repeats N]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from graftnet.kernels import reference

try:
    from graftnet.kernels import _convcy as compiled
except ImportError:
    compiled = None

CASES = [
    # (label, batch, cin, cout, hw, k)
    ("conv1 toy", 16, 1, 16, 8, 3),
    ("conv2 toy", 16, 16, 32, 8, 3),
    ("wide 32ch", 32, 32, 32, 16, 3),
    ("cifar-ish", 32, 3, 32, 32, 3),
]


def time_call(fn, *args, repeats):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def bench_kernels(repeats: int):
    rng = np.random.default_rng(0)
    print(f"{'case':<12} {'op':<9} {'numpy':>10} {'compiled':>10} {'speedup':>8}")
    for label, n, cin, cout, hw, k in CASES:
        x = rng.normal(size=(n, cin, hw, hw))
        w = rng.normal(size=(cout, cin, k, k))
        b = rng.normal(size=cout)
        pad = k // 2
        gy = rng.normal(size=(n, cout, hw, hw))
        for op, ref_fn, args in (
            ("forward", reference.conv2d_forward, (x, w, b, pad)),
            ("backward", reference.conv2d_backward, (x, w, gy, pad)),
        ):
            t_ref = time_call(ref_fn, *args, repeats=repeats)
            if compiled is None:
                print(f"{label:<12} {op:<9} {t_ref * 1e6:>8.0f}us {'n/a':>10} {'':>8}")
                continue
            comp_fn = getattr(compiled, ref_fn.__name__)
            t_comp = time_call(comp_fn, *args, repeats=repeats)
            print(
                f"{label:<12} {op:<9} {t_ref * 1e6:>8.0f}us {t_comp * 1e6:>8.0f}us "
                f"{t_ref / t_comp:>7.2f}x"
            )


def bench_epoch(repeats: int):
    """One full training epoch per backend (kernel choice monkeypatched)."""
    from graftnet import kernels as kmod
    from graftnet.data import make_synthetic
    from graftnet.model import ArchSpec, build_model
    from graftnet.train import TrainHyperparams, train_epoch

    data = make_synthetic(3, 100, 8, 8, 0)
    hp = TrainHyperparams(initial_lr=0.1, epochs=1, batch_size=16)
    model = build_model(ArchSpec(), 0)

    backends = [("numpy", reference)]
    if compiled is not None:
        backends.append(("compiled", compiled))
    times = {}
    saved = (kmod.conv2d_forward, kmod.conv2d_backward)
    try:
        for name, mod in backends:
            kmod.conv2d_forward = mod.conv2d_forward
            kmod.conv2d_backward = mod.conv2d_backward
            times[name] = time_call(
                lambda: train_epoch(model, data, hp, 0), repeats=repeats
            )
    finally:
        kmod.conv2d_forward, kmod.conv2d_backward = saved

    print()
    for name, t in times.items():
        print(f"train_epoch ({name}): {t * 1e3:.1f} ms")
    if len(times) == 2:
        print(f"epoch speedup: {times['numpy'] / times['compiled']:.2f}x")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()
    if compiled is None:
        print("compiled extension not available; timing the fallback only\n")
    bench_kernels(args.repeats)
    bench_epoch(args.repeats)


if __name__ == "__main__":
    main()
