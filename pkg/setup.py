"""Build script: compiles the optional range-coder kernel.

The package works without the extension (a pure-Python engine is selected
at import time), so a failed compile only costs speed.
"""

import sys

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "lmgc.coder._speed",
                ["src/lmgc/coder/_speed.pyx"],
                extra_compile_args=["-O3"],
                include_dirs=[numpy.get_include()],
            )
        ],
        language_level=3,
    )
except Exception as exc:  # pragma: no cover - build-env dependent
    sys.stderr.write(f"lmgc: skipping compiled kernel ({exc}); pure-Python engine will be used\n")

setup(ext_modules=ext_modules)
