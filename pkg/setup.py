"""Build script for the compiled kinematics/dynamics core.

The extension is optional: if Cython or a C toolchain is unavailable the
package installs anyway and falls back to the pure-numpy kernels at import.

Usage: pip install -e . --no-build-isolation
"""
import os

from setuptools import setup

try:
    import numpy as np
    from Cython.Build import cythonize
    from setuptools import Extension

    extensions = cythonize(
        [
            Extension(
                "gic._backend.fastcore",
                ["src/gic/_backend/fastcore.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
            "initializedcheck": False,
        },
    )
except ImportError:
    extensions = []

if os.environ.get("GIC_NO_EXT"):
    extensions = []

setup(ext_modules=extensions)
