# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled stride-1 convolution kernels.

Direct-loop implementation with pointer-based inner loops (so the C
compiler can vectorize them); everything runs without the GIL, letting
worker threads convolve in parallel.
"""

import numpy as np


def conv2d_forward(x, w, b, int pad):
    """x: [n, cin, h, w], w: [cout, cin, kh, kw], b: [cout] -> [n, cout, oh, ow]."""
    cdef double[:, :, :, ::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef double[:, :, :, ::1] wv = np.ascontiguousarray(w, dtype=np.float64)
    cdef double[::1] bv = np.ascontiguousarray(b, dtype=np.float64)

    cdef Py_ssize_t n = xv.shape[0], cin = xv.shape[1], h = xv.shape[2], wd = xv.shape[3]
    cdef Py_ssize_t cout = wv.shape[0], kh = wv.shape[2], kw = wv.shape[3]
    cdef Py_ssize_t oh = h + 2 * pad - kh + 1
    cdef Py_ssize_t ow = wd + 2 * pad - kw + 1

    out = np.empty((n, cout, oh, ow), dtype=np.float64)
    cdef double[:, :, :, ::1] yv = out
    cdef Py_ssize_t i, co, ci, dh, dw, r, c, r0, r1, c0, c1, span
    cdef double wgt, bias
    cdef double *yrow
    cdef const double *xrow

    with nogil:
        for i in range(n):
            for co in range(cout):
                bias = bv[co]
                yrow = &yv[i, co, 0, 0]
                for c in range(oh * ow):
                    yrow[c] = bias
                for ci in range(cin):
                    for dh in range(kh):
                        r0 = pad - dh if pad - dh > 0 else 0
                        r1 = h + pad - dh if h + pad - dh < oh else oh
                        for dw in range(kw):
                            c0 = pad - dw if pad - dw > 0 else 0
                            c1 = wd + pad - dw if wd + pad - dw < ow else ow
                            span = c1 - c0
                            if span <= 0:
                                continue
                            wgt = wv[co, ci, dh, dw]
                            for r in range(r0, r1):
                                yrow = &yv[i, co, r, c0]
                                xrow = &xv[i, ci, r - pad + dh, c0 - pad + dw]
                                for c in range(span):
                                    yrow[c] += wgt * xrow[c]
    return out


def conv2d_backward(x, w, gy, int pad):
    """Gradients w.r.t. input, weights, and bias. Returns (gx, gw, gb)."""
    cdef double[:, :, :, ::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef double[:, :, :, ::1] wv = np.ascontiguousarray(w, dtype=np.float64)
    cdef double[:, :, :, ::1] gv = np.ascontiguousarray(gy, dtype=np.float64)

    cdef Py_ssize_t n = xv.shape[0], cin = xv.shape[1], h = xv.shape[2], wd = xv.shape[3]
    cdef Py_ssize_t cout = wv.shape[0], kh = wv.shape[2], kw = wv.shape[3]
    cdef Py_ssize_t oh = gv.shape[2], ow = gv.shape[3]

    gx = np.zeros((n, cin, h, wd), dtype=np.float64)
    gw = np.zeros((cout, cin, kh, kw), dtype=np.float64)
    gb = np.zeros(cout, dtype=np.float64)
    cdef double[:, :, :, ::1] gxv = gx
    cdef double[:, :, :, ::1] gwv = gw
    cdef double[::1] gbv = gb
    cdef Py_ssize_t i, co, ci, dh, dw, r, c, r0, r1, c0, c1, span
    cdef double wgt, acc, gsum
    cdef const double *grow
    cdef const double *xrow
    cdef double *gxrow

    with nogil:
        for i in range(n):
            for co in range(cout):
                grow = &gv[i, co, 0, 0]
                gsum = 0.0
                for c in range(oh * ow):
                    gsum += grow[c]
                gbv[co] += gsum
                for ci in range(cin):
                    for dh in range(kh):
                        r0 = pad - dh if pad - dh > 0 else 0
                        r1 = h + pad - dh if h + pad - dh < oh else oh
                        for dw in range(kw):
                            c0 = pad - dw if pad - dw > 0 else 0
                            c1 = wd + pad - dw if wd + pad - dw < ow else ow
                            span = c1 - c0
                            if span <= 0:
                                continue
                            wgt = wv[co, ci, dh, dw]
                            acc = 0.0
                            for r in range(r0, r1):
                                grow = &gv[i, co, r, c0]
                                xrow = &xv[i, ci, r - pad + dh, c0 - pad + dw]
                                gxrow = &gxv[i, ci, r - pad + dh, c0 - pad + dw]
                                for c in range(span):
                                    acc += grow[c] * xrow[c]
                                    gxrow[c] += grow[c] * wgt
                            gwv[co, ci, dh, dw] += acc
    return gx, gw, gb
