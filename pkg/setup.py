import numpy as np
from Cython.Build import cythonize
from setuptools import Extension, setup

# No -ffast-math: the compiled kernels must stay bit-identical to the
# pure-Python reference path.
extensions = [
    Extension(
        "unifec.kernel._core",
        ["src/unifec/kernel/_core.pyx"],
        include_dirs=[np.get_include()],
        extra_compile_args=["-O3"],
    )
]

setup(
    ext_modules=cythonize(
        extensions,
        compiler_directives={"language_level": "3"},
    )
)
