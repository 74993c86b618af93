"""Optional Cython build of the min-cost flow kernel; the package works without it."""

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

if cythonize is not None:
    ext_modules = cythonize(["src/schedflow/_kernel.pyx"], language_level=3, quiet=True)

setup(ext_modules=ext_modules)
