"""Build script: compiles the optional Cython solver kernel.

The package works without the extension (a pure-Python kernel is selected at
import time), so the build must never fail on a machine without Cython or a
C compiler.
"""

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
    from setuptools import Extension

    ext = Extension(
        "quanteq._kernels._core",
        ["src/quanteq/_kernels/_core.pyx"],
        include_dirs=[numpy.get_include()],
        # -ffp-contract=off keeps the compiled kernel bit-compatible with the
        # pure-Python fallback (no FMA contraction of a*b+c).
        extra_compile_args=["-O3", "-ffp-contract=off"],
        optional=True,
    )
    ext_modules = cythonize([ext], language_level=3)
except ImportError:
    pass

setup(ext_modules=ext_modules)
