"""Convolution kernel backend selection.

The compiled extension is preferred when present; otherwise the NumPy
fallback is used. Set ``GRAFTNET_KERNELS`` to ``compiled`` or ``python``
to force a backend (``compiled`` raises if the extension is missing).
Results are deterministic within a backend; across backends they agree to
roundoff only, because summation order differs.
"""

from __future__ import annotations

import os

from ..errors import ConfigError

_requested = os.environ.get("GRAFTNET_KERNELS", "auto").strip().lower()

if _requested not in ("auto", "compiled", "python"):
    raise ConfigError(
        f"GRAFTNET_KERNELS must be auto, compiled, or python, got {_requested!r}"
    )

if _requested == "python":
    from .reference import conv2d_backward, conv2d_forward
    BACKEND = "python"
else:
    try:
        from ._convcy import conv2d_backward, conv2d_forward
        BACKEND = "compiled"
    except ImportError:
        if _requested == "compiled":
            raise ConfigError(
                "GRAFTNET_KERNELS=compiled but the extension is not built; "
                "reinstall with a C compiler available"
            ) from None
        from .reference import conv2d_backward, conv2d_forward
        BACKEND = "python"

__all__ = ["BACKEND", "conv2d_forward", "conv2d_backward"]
