"""Build the optional compiled kernels; the package works without them."""

import os

from setuptools import setup

ext_modules = []
if os.environ.get("COMPSUM_NO_EXT") != "1":
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension

        ext = Extension(
            "compsum.montecarlo._kernels",
            ["src/compsum/montecarlo/_kernels.pyx"],
            include_dirs=[np.get_include()],
            # no FMA contraction: keeps results bit-identical to the Python kernels
            extra_compile_args=["-O2", "-ffp-contract=off"],
        )
        ext_modules = cythonize([ext], language_level=3)
    except ImportError:
        pass

setup(ext_modules=ext_modules)
