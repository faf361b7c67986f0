"""Build script: compiles the enumeration kernels unless the toolchain is missing.

The package works without the extension (a pure-Python/numpy fallback is
selected at import time), but the compiled kernels are what make the large
verification runs fit their time budgets.
"""

import os

from setuptools import setup

ext_modules = []
if (
    os.environ.get("CACONES_PURE", "") != "1"
    and os.path.exists("src/cacones/_kernels.pyx")
):
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "cacones._kernels",
                    ["src/cacones/_kernels.pyx"],
                    include_dirs=[numpy.get_include()],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
