"""Build script for the optional compiled kernels.

The package is fully functional without them; a failed or skipped build
leaves the numpy fallback in place.
"""

import os

from setuptools import setup

ext_modules = []
if not os.environ.get("HELMBIE_NO_EXT"):
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "helmbie._kernels._ckernels",
                    ["src/helmbie/_kernels/_ckernels.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3", "-ffp-contract=off"],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            language_level=3,
        )

setup(ext_modules=ext_modules)
