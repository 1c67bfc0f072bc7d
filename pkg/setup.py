import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pure-Python install; greenghz falls back to NumPy kernels
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "greenghz.tomography._likelihood",
                ["src/greenghz/tomography/_likelihood.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3"],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
