import numpy as np
from setuptools import Extension, setup

# The compiled kernels are optional: if Cython or a C toolchain is missing the
# install proceeds and bodylink falls back to the pure-Python kernels.
# -ffp-contract=off keeps C arithmetic bit-identical to the Python fallback
# (no fused multiply-add), which the backend parity tests rely on.
try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "bodylink._ckernels",
                ["src/bodylink/_ckernels.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3", "-ffp-contract=off", "-fno-builtin-sin", "-fno-builtin-cos"],
                optional=True,
            )
        ],
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)
