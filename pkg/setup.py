import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pure-Python install; dkastar falls back at import
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "dkastar._kernels",
                ["src/dkastar/_kernels.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                language="c++",
                # no -ffast-math / -march=native: keep IEEE semantics so both
                # backends agree to the last few ulps
                extra_compile_args=["-O3", "-ffp-contract=off"],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
