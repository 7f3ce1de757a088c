import os

from setuptools import setup

ext_modules = []
if not os.environ.get("LEARNSIM_NO_EXT"):
    try:
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "learnsim._kernels",
                    ["src/learnsim/_kernels.pyx"],
                    # keep a*b+c unfused so results match the Python kernel bitwise
                    extra_compile_args=["-O3", "-ffp-contract=off", "-fno-fast-math"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
