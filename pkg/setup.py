"""Build script: compiles the optional Cython kernels.

The compiled extension is a pure accelerator; if Cython or a C compiler is
unavailable the install completes without it and the package runs on the
pure-Python kernels (ICCBF_BACKEND=auto falls back automatically).
"""

import sys

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext
from setuptools.errors import CCompilerError, ExecError, PlatformError


class OptionalBuildExt(build_ext):
    """Skip the extension (with a notice) instead of failing the install."""

    def run(self):
        try:
            super().run()
        except (PlatformError, ExecError) as exc:
            self._skip(exc)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except (CCompilerError, ExecError, PlatformError, ValueError) as exc:
            self._skip(exc)

    @staticmethod
    def _skip(exc):
        print(f"NOTICE: compiled kernels skipped ({exc}); "
              "the pure-Python backend will be used", file=sys.stderr)


def extensions():
    try:
        from Cython.Build import cythonize
    except ImportError:
        print("NOTICE: Cython not available; building without compiled kernels",
              file=sys.stderr)
        return []
    ext = Extension(
        "iccbf._kernels._fast",
        ["src/iccbf/_kernels/_fast.pyx"],
        extra_compile_args=["-O3"],
    )
    return cythonize([ext], language_level=3)


setup(
    ext_modules=extensions(),
    cmdclass={"build_ext": OptionalBuildExt},
)
