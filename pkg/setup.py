import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "organic_effects._ckernels",
                ["src/organic_effects/_ckernels.pyx"],
                include_dirs=[np.get_include()],
                # no FMA contraction: keeps sums bitwise equal to the numpy fallback
                extra_compile_args=["-O3", "-ffp-contract=off"],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
