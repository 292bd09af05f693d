"""Build hook: compile the optional Cython kernels when the toolchain allows.

The package is fully functional without the extension (numpy fallbacks are
selected at import); a failed extension build therefore degrades gracefully
instead of failing the install.
"""
from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [Extension(
            "trapscat._kernels",
            ["src/trapscat/_kernels.pyx"],
            include_dirs=[numpy.get_include()],
            define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            extra_compile_args=["-O3"],
        )],
        language_level=3,
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
