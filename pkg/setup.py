"""Build script: compiles the optional convolution extension.

The package is fully functional without the extension (a NumPy fallback is
selected at import time), so a failed compile only prints a warning.
"""

import sys

from setuptools import setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    """Build the extension if possible, otherwise continue without it."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing, etc.
            self._warn(exc)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            self._warn(exc)

    @staticmethod
    def _warn(exc):
        print(
            f"warning: compiled kernels unavailable ({exc}); "
            "graftnet will use the pure-NumPy fallback",
            file=sys.stderr,
        )


def extensions():
    try:
        from Cython.Build import cythonize
    except ImportError:
        print(
            "warning: Cython not installed; building without compiled kernels",
            file=sys.stderr,
        )
        return []
    from setuptools import Extension

    ext = Extension(
        "graftnet.kernels._convcy",
        ["src/graftnet/kernels/_convcy.pyx"],
        extra_compile_args=["-O3", "-funroll-loops"],
    )
    return cythonize([ext], language_level=3)


setup(
    ext_modules=extensions(),
    cmdclass={"build_ext": OptionalBuildExt},
)
