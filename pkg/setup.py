"""Build script: compiles the optional hot-loop extension.

The package is fully functional without the extension (a NumPy fallback is
selected at import time); the compiled kernels just make the sphere-direction
by grid-cell moment sums faster.  `pip install -e . --no-build-isolation`
builds it when Cython and a C compiler are present.
"""

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "affine_energy._kernels",
                ["src/affine_energy/_kernels.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
