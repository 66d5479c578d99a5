"""Builds the optional compiled kernels; the package still works without them."""

import os

from setuptools import setup

ext_modules = []
if os.environ.get("MTTSPO_NO_EXT", "") in ("", "0"):
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [Extension(
                "mttspo._kernels",
                ["src/mttspo/_kernels.pyx"],
                include_dirs=[np.get_include()],
                language="c++",
                # no FMA contraction: results must match the Python kernels bit for bit
                extra_compile_args=["-O2", "-ffp-contract=off"],
            )],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
