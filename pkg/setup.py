"""Build script for the optional compiled kernel extension.

The package works without the extension (a pure numpy fallback is selected
at import time), so a failed Cython build only costs speed, not features.
"""

import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

ext_modules = []
if cythonize is not None:
    ext_modules = cythonize(
        [
            Extension(
                "noregret._kernels_cy",
                ["src/noregret/_kernels_cy.pyx"],
                include_dirs=[np.get_include()],
                # -ffp-contract=off keeps the compiled kernels bit-compatible
                # with the pure numpy fallback (no surprise FMA fusion).
                extra_compile_args=["-O2", "-ffp-contract=off"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
