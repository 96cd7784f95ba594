"""Build script: compiles the optional Cython kernel extension.

The package works without the extension (a NumPy fallback is selected at
import time); build it for the fast backend:

    python setup.py build_ext --inplace
"""

import os

from setuptools import Extension, setup


def _extensions():
    try:
        from Cython.Build import cythonize
        import numpy as np
    except ImportError:
        return []
    ext = Extension(
        "gmtc.backend._corekernels",
        ["src/gmtc/backend/_corekernels.pyx"],
        include_dirs=[np.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        # -ffp-contract=off keeps the rotation arithmetic bit-identical to
        # the NumPy fallback (no fused multiply-add contraction).
        extra_compile_args=["-O3", "-ffp-contract=off"],
    )
    return cythonize(
        [ext],
        compiler_directives={
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
            "language_level": "3",
        },
    )


setup(ext_modules=_extensions())
