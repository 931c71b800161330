from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    # optional=True: if no C toolchain is available the build still succeeds
    # and maoii.sim falls back to the pure-Python kernel at import time.
    ext_modules = cythonize(
        [
            Extension(
                "maoii.sim._kernel",
                ["src/maoii/sim/_kernel.pyx"],
                extra_compile_args=["-O3"],
                optional=True,
            )
        ],
        language_level=3,
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
