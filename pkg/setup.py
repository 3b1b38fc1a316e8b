# Builds the optional compiled kernel.  `ZEROSUM_SKIP_EXT=1 pip install ...`
# produces a pure-Python install; the package selects the fallback at import.
import os

from setuptools import setup

ext_modules = []
if not os.environ.get("ZEROSUM_SKIP_EXT"):
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            ["src/zerosum/_kernel/_ckernel.pyx"],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        pass

setup(ext_modules=ext_modules)
