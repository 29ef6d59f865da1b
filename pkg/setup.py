"""Build script: compiles the optional Cython kernel extension.

The package works without the extension (a pure NumPy fallback is selected
at import time), so a missing compiler or Cython only costs speed.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "seqlcd._kernels",
                ["src/seqlcd/_kernels.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        language_level="3",
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)
