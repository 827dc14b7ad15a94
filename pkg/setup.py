from setuptools import Extension, setup
from Cython.Build import cythonize

# -ffp-contract=off: the compiled kernels must produce bit-identical floats to
# the pure-Python fallback; FMA contraction of `mean + sd * z` would break that.
ext = Extension(
    "lexidiag._kernels",
    ["src/lexidiag/_kernels.pyx"],
    extra_compile_args=["-O3", "-ffp-contract=off"],
)

setup(ext_modules=cythonize([ext], language_level=3))
