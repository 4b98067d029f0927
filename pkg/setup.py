import os

import numpy as np
from setuptools import Extension, setup

ext_modules = []
if os.environ.get("ROBUSTECD_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize
    except ImportError:
        cythonize = None
    if cythonize is not None:
        ext_modules = cythonize(
            [
                Extension(
                    "robustecd._ckernels",
                    ["src/robustecd/_ckernels.pyx"],
                    include_dirs=[np.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                    extra_compile_args=["-O3"],
                    language="c++",
                )
            ],
            language_level=3,
        )

setup(ext_modules=ext_modules)
