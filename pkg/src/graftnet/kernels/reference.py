"""Pure-NumPy convolution kernels (im2col + matmul).

Fallback backend used when the compiled extension is unavailable. Results
agree with the compiled kernels to floating-point roundoff; summation order
differs, so cross-backend results are close but not bit-identical.
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


def _im2col(x_padded: np.ndarray, kh: int, kw: int) -> np.ndarray:
    """[n, c, hp, wp] -> [n, oh*ow, c*kh*kw] patch matrix."""
    win = sliding_window_view(x_padded, (kh, kw), axis=(2, 3))
    n, c, oh, ow = win.shape[:4]
    cols = win.transpose(0, 2, 3, 1, 4, 5).reshape(n, oh * ow, c * kh * kw)
    return np.ascontiguousarray(cols)


def conv2d_forward(x: np.ndarray, w: np.ndarray, b: np.ndarray, pad: int) -> np.ndarray:
    """Stride-1 2-D convolution.

    x: [n, cin, h, w], w: [cout, cin, kh, kw], b: [cout].
    """
    n, _, h, wd = x.shape
    cout, cin, kh, kw = w.shape
    oh = h + 2 * pad - kh + 1
    ow = wd + 2 * pad - kw + 1
    xp = np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad)))
    cols = _im2col(xp, kh, kw)
    y = cols @ w.reshape(cout, cin * kh * kw).T
    y += b
    return np.ascontiguousarray(y.transpose(0, 2, 1).reshape(n, cout, oh, ow))


def conv2d_backward(
    x: np.ndarray, w: np.ndarray, gy: np.ndarray, pad: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Gradients of a stride-1 convolution w.r.t. input, weights, and bias.

    gy: upstream gradient, shaped like the forward output.
    Returns (gx, gw, gb).
    """
    n, cin, h, wd = x.shape
    cout, _, kh, kw = w.shape
    oh, ow = gy.shape[2], gy.shape[3]
    xp = np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad)))
    cols = _im2col(xp, kh, kw)
    gym = np.ascontiguousarray(gy.reshape(n, cout, oh * ow).transpose(0, 2, 1))

    gb = gy.sum(axis=(0, 2, 3))
    gw = np.tensordot(gym, cols, axes=([0, 1], [0, 1])).reshape(w.shape)

    gcols = (gym @ w.reshape(cout, cin * kh * kw)).reshape(n, oh, ow, cin, kh, kw)
    gxp = np.zeros_like(xp)
    for dh in range(kh):
        for dw in range(kw):
            gxp[:, :, dh:dh + oh, dw:dw + ow] += gcols[:, :, :, :, dh, dw].transpose(0, 3, 1, 2)
    gx = np.ascontiguousarray(gxp[:, :, pad:pad + h, pad:pad + wd])
    return gx, gw, gb
