"""Build script for the optional compiled channel-gain kernels.

The package is fully functional without the extension (a NumPy fallback is
selected at import time); the extension only accelerates the hot pairwise
Lambertian-gain loops used by the radiosity solver and dataset generation.
"""

import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "lifiloc._ckernels",
                ["src/lifiloc/_ckernels.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                optional=True,
            )
        ],
        language_level=3,
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
