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
                "hapnet._kernels",
                ["src/hapnet/_kernels.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                # reassociation lets the compiler vectorise the reductions
                extra_compile_args=["-O3", "-fno-math-errno", "-fno-trapping-math",
                                    "-fassociative-math", "-fno-signed-zeros"],
                optional=True,
            )
        ],
        language_level=3,
    )

setup(ext_modules=ext_modules)
