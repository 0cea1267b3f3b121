"""Build the optional compiled jet kernels.

The package works without them (numpy fallback); set CRFLAT_NO_EXT=1 to skip
the extension entirely.
"""

import os

from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("CRFLAT_NO_EXT"):
    try:
        from Cython.Build import cythonize
    except ImportError:
        cythonize = None
    if cythonize is not None:
        ext_modules = cythonize(
            [Extension("crflat._jetcore", ["src/crflat/_jetcore.pyx"],
                       extra_compile_args=["-O3"])],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
