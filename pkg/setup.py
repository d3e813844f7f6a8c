from setuptools import Extension, setup
from Cython.Build import cythonize

setup(
    ext_modules=cythonize(
        [Extension(
            "ricci_lab._kernels._core",
            ["src/ricci_lab/_kernels/_core.pyx"],
            extra_compile_args=["-O3"],
        )],
        language_level=3,
    ),
)
