"""Build the compiled alignment kernel; fall back silently to pure Python."""

import os

from setuptools import setup

ext_modules = []
if not os.environ.get("ICMAUS_PURE_PYTHON"):
    try:
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [Extension("icmaus._ckernel", ["src/icmaus/_ckernel.pyx"], extra_compile_args=["-O3"])],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
