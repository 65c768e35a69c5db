"""Build script for the optional compiled coordinate-descent kernel.

The package is pure Python plus one Cython extension. If Cython or a C
compiler is unavailable the extension is skipped and the solver falls back
to the pure-Python kernel at import time.
"""

from setuptools import Extension, setup

extensions = []
try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [Extension("hazlasso._cd_fast", ["src/hazlasso/_cd_fast.pyx"])],
        compiler_directives={
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
            "language_level": 3,
        },
    )
except ImportError:
    pass

setup(ext_modules=extensions)
