"""Build script for the optional compiled kernels.

The package works without the extension: vidfactory.engine.backend falls
back to the pure-numpy kernels when the compiled module is missing (or when
VIDFACTORY_PURE=1). Both backends are bit-identical; the extension is only
faster.
"""

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        "src/vidfactory/engine/_kernels.pyx",
        compiler_directives={"language_level": "3"},
    )
    for ext in ext_modules:
        ext.include_dirs.append(numpy.get_include())
except ImportError:
    pass

setup(ext_modules=ext_modules)
