from setuptools import Extension, setup

# The compiled counting kernel is optional: when Cython (or a C compiler)
# is unavailable the package falls back to the pure-Python implementation
# selected at import time in storyphrase._kernels.
try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                name="storyphrase._kernels._fast",
                sources=["src/storyphrase/_kernels/_fast.pyx"],
            )
        ],
        language_level=3,
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)
