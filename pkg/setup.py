"""Build script: compiles the optional fast kernels extension.

The package works without the extension (pure-numpy fallback is selected at
import time), so a missing compiler or Cython only costs speed.
"""
import os

from setuptools import Extension, setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    if not os.path.exists("src/matchband/_speedups.pyx"):
        raise ImportError
    npyrandom_dir = os.path.join(os.path.dirname(numpy.random.__file__), "lib")
    ext = Extension(
        "matchband._speedups",
        ["src/matchband/_speedups.pyx"],
        include_dirs=[numpy.get_include()],
        library_dirs=[npyrandom_dir],
        libraries=["npyrandom"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    ext_modules = cythonize([ext], compiler_directives={"language_level": "3"})
except ImportError:
    pass

setup(ext_modules=ext_modules)
