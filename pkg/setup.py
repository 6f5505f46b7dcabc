"""Build script for the optional compiled kernel module.

The package is fully functional without the extension (a NumPy fallback is
selected at import time); the extension only accelerates the hot loops.
Set CURATE_SKIP_NATIVE=1 to force a pure-Python install.
"""

import os

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """Skip the extension instead of failing the whole install."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing, etc.
            print(f"warning: skipping native kernels ({exc}); using NumPy fallback")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"warning: could not build {ext.name} ({exc}); using NumPy fallback")


ext_modules = []
cmdclass = {}
if os.environ.get("CURATE_SKIP_NATIVE") != "1":
    try:
        import numpy
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "curate._native",
                    ["src/curate/_native.pyx"],
                    include_dirs=[numpy.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
        cmdclass = {"build_ext": optional_build_ext}
    except ImportError as exc:
        print(f"warning: Cython/NumPy unavailable at build time ({exc}); pure-Python install")

setup(ext_modules=ext_modules, cmdclass=cmdclass)
