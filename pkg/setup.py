"""Build script for the optional compiled sampling kernel.

The package is fully functional without the extension (a numpy fallback is
selected at import); the Cython build is attempted and skipped on failure.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    import numpy as np
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "boundarywalk._kernel",
                ["src/boundarywalk/_kernel.pyx"],
                include_dirs=[np.get_include()],
            )
        ],
        language_level=3,
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
