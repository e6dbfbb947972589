"""Build script: compiles the optional divided-difference kernel.

The extension is marked optional so that environments without a C
toolchain still get a working install (the pure-Python fallback in
toricmu.integrate is picked up at import time).
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "toricmu._ddexp",
                ["src/toricmu/_ddexp.pyx"],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)
