"""Builds the optional Cython kernels; the package works without them."""
import os

import numpy as np
from setuptools import Extension, setup

ext_modules = []
if os.environ.get("DIRACBRACKET_NO_EXT", "") not in ("1", "true", "yes"):
    try:
        from Cython.Build import cythonize
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [Extension("diracbracket._ckernels", ["src/diracbracket/_ckernels.pyx"],
                       include_dirs=[np.get_include()], extra_compile_args=["-O3"])],
            compiler_directives={"language_level": "3", "boundscheck": False,
                                 "wraparound": False, "cdivision": True},
        )

setup(ext_modules=ext_modules)
