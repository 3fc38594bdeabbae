# Builds the optional compiled interpreter core.  The package is fully
# functional without it (a pure-Python twin is selected at import time),
# so a missing compiler or Cython must not fail the install.
import warnings

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        "src/aliascert/_simcore.pyx",
        language_level=3,
    )
    for ext in ext_modules:
        ext.optional = True
except ImportError:
    warnings.warn("Cython not available; installing with the pure-Python core only")

setup(ext_modules=ext_modules)
