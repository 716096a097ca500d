"""Build hook for the optional compiled simulation kernels.

The package is pure Python plus one accelerator extension
(``metactl.navsim._kernels``). If Cython or a C toolchain is unavailable the
extension is skipped and the package falls back to the pure-Python kernels at
import time.
"""
import sys

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        ["src/metactl/navsim/_kernels.pyx"],
        language_level=3,
    )
    include_dirs = [numpy.get_include()]
except ImportError as exc:
    print(f"building without compiled kernels: {exc}", file=sys.stderr)
    include_dirs = []

for ext in ext_modules:
    ext.include_dirs.extend(include_dirs)

setup(ext_modules=ext_modules)
