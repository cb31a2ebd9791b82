"""Build script: compiles the chart-recognizer kernel when Cython is available.

The package works without the extension (a pure-Python kernel is selected at
import time), so a missing compiler or missing Cython must not fail the build.
"""

import os

from setuptools import setup

PYX = "src/graphparse/engine/_recognizer_c.pyx"

ext_modules = []
if os.path.exists(PYX):
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize([PYX], language_level=3, annotate=False)
    except ImportError:
        pass

setup(ext_modules=ext_modules)
