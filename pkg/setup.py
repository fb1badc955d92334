import os

import numpy as np
from setuptools import Extension, setup

# Set E1LAB_NO_EXT=1 to install the pure-Python package only.
ext_modules = []
if not os.environ.get("E1LAB_NO_EXT"):
    try:
        from Cython.Build import cythonize
    except ImportError:
        cythonize = None
    if cythonize is not None:
        ext_modules = cythonize(
            [
                Extension(
                    "e1lab._kernels",
                    ["src/e1lab/_kernels.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3"],
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
