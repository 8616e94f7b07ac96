import os

import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # build without the compiled core
    cythonize = None

ext_modules = []
if cythonize is not None and not os.environ.get("XORREP_NO_EXT"):
    ext_modules = cythonize(
        [
            Extension(
                "xorrep._kernels",
                ["src/xorrep/_kernels.pyx"],
                include_dirs=[numpy.get_include()],
            )
        ],
        compiler_directives={"language_level": "3", "boundscheck": False, "wraparound": False},
    )

setup(ext_modules=ext_modules)
