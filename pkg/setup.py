"""Build the optional Cython gate kernels.

If compilation fails the package still installs and falls back to the
numpy kernels in ``curvedchain._kernels_py``.
"""
import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pragma: no cover
    cythonize = None

ext_modules = []
if cythonize is not None:
    ext_modules = cythonize(
        [
            Extension(
                "curvedchain._kernels",
                ["src/curvedchain/_kernels.pyx"],
                include_dirs=[np.get_include()],
                # limited-range complex multiply skips the NaN/inf recovery path
                extra_compile_args=["-O3", "-fcx-limited-range"],
                optional=True,
            )
        ],
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )

setup(ext_modules=ext_modules)
