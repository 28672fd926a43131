"""Build hooks for the optional compiled kernel.

The package is fully functional without the extension; ideval._backend
falls back to the pure-Python kernel when the import fails.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

ext_modules = []
if cythonize is not None:
    ext_modules = cythonize(
        [
            Extension(
                "ideval._kernels",
                ["src/ideval/_kernels.pyx"],
                language="c++",
            )
        ],
        language_level=3,
    )

setup(ext_modules=ext_modules)
