"""Build script for the optional compiled stencil kernels.

The package is pure Python plus one Cython extension holding the hot
9-point-stencil loops (residual evaluation and Jacobian assembly).  The
extension is optional: if it fails to build, the package falls back to the
vectorized numpy kernels at import time.
"""

from setuptools import Extension, setup

import numpy as np

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

ext_modules = []
if cythonize is not None:
    ext = Extension(
        "translatorlab._kernels._stencil",
        ["src/translatorlab/_kernels/_stencil.pyx"],
        include_dirs=[np.get_include()],
        extra_compile_args=["-O3"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        optional=True,
    )
    ext_modules = cythonize(ext, compiler_directives={"language_level": "3"})

setup(ext_modules=ext_modules)
