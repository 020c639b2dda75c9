from setuptools import Extension, setup

# The compiled kernels are optional: without a compiler the package falls
# back to the numpy implementations in schroeder_lab.kernels._fallback.
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "schroeder_lab.kernels._core",
                ["src/schroeder_lab/kernels/_core.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
