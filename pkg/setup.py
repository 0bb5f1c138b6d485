"""Build script: compiles the optional C extension for the hot codec/scoring loops.

The package is fully functional without the extension (a pure-Python
implementation of the same kernels is selected at import time), so any
failure to build it downgrades to a warning instead of aborting the
install.  Set CIFFKIT_NO_EXTENSION=1 to skip the extension entirely.
"""

import os
import sys

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler/toolchain missing
            self._warn(exc)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            self._warn(exc)

    @staticmethod
    def _warn(exc):
        print(
            "WARNING: building the ciffkit C extension failed (%s); "
            "falling back to the pure-Python kernels" % exc,
            file=sys.stderr,
        )


ext_modules = []
cmdclass = {}
if os.environ.get("CIFFKIT_NO_EXTENSION") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "ciffkit._ckernels",
                    ["src/ciffkit/_ckernels.pyx"],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
        cmdclass = {"build_ext": optional_build_ext}
    except ImportError:
        print(
            "WARNING: Cython not available; installing with pure-Python kernels",
            file=sys.stderr,
        )

setup(ext_modules=ext_modules, cmdclass=cmdclass)
