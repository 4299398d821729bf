import os
import sys

import numpy as np
from setuptools import Extension, setup

# CHAOSLAB_NO_EXT=1 installs the pure-Python package only.
ext_modules = []
if not os.environ.get("CHAOSLAB_NO_EXT"):
    try:
        from Cython.Build import cythonize
    except ImportError:
        print("Cython not available; building without the compiled kernels", file=sys.stderr)
    else:
        openmp = [] if sys.platform == "darwin" else ["-fopenmp"]
        ext = Extension(
            "chaoslab._kernels",
            ["src/chaoslab/_kernels.pyx"],
            include_dirs=[np.get_include()],
            define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            extra_compile_args=["-O3", "-ffp-contract=off"] + openmp,
            extra_link_args=openmp,
        )
        ext_modules = cythonize([ext], language_level=3)

setup(ext_modules=ext_modules)
