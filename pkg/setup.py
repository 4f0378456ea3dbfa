"""Build script for the optional compiled kernel extension.

The package is fully functional without the extension (a numpy fallback is
selected at import time); the extension only accelerates the hot kernels.
"""
import os

import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

extensions = []
if cythonize is not None and os.path.exists("src/sfrcnet/_kernels/_fast.pyx"):
    extensions = cythonize(
        [
            Extension(
                "sfrcnet._kernels._fast",
                ["src/sfrcnet/_kernels/_fast.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
    for ext in extensions:
        ext.optional = True

setup(ext_modules=extensions)
