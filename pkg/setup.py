"""Build script: compiles the optional Cython kernel core.

The package is fully functional without the extension (a NumPy fallback
is selected at import time), so any failure to compile is downgraded to
a warning and the build proceeds pure-Python.
"""

import warnings

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "calmin.kernels._core",
                ["src/calmin/kernels/_core.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )
except Exception as exc:  # pragma: no cover - depends on build env
    warnings.warn(f"Cython kernel core not built ({exc}); using NumPy fallback")

setup(ext_modules=ext_modules)
