"""Build the optional compiled trajectory kernel.

Without Cython (or a C compiler) the package installs without it and
``hyperbps.trajectories`` falls back to the pure-Python kernel.
"""

import os

from setuptools import setup

ext_modules = []
if os.environ.get("HYPERBPS_NO_EXT") != "1":
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [Extension("hyperbps._trace", ["src/hyperbps/_trace.pyx"],
                       include_dirs=[np.get_include()], extra_compile_args=["-O3"])],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
