import sys

from setuptools import setup

# The compiled kernels are optional: if Cython or a C compiler is missing the
# package installs anyway and glt.kernels falls back to the numpy backend.
ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
    from setuptools.extension import Extension

    ext_modules = cythonize(
        [
            Extension(
                "glt.kernels._ext",
                sources=["src/glt/kernels/_ext.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level="3",
    )
except ImportError as exc:
    print(f"building without compiled kernels ({exc})", file=sys.stderr)

setup(ext_modules=ext_modules)
