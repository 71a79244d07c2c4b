"""Build script for the optional compiled kernel core.

The package works without the extension (a numpy fallback is selected at
import time), so a failed build of ``critfield._speedups`` should not make
the install unusable.  We therefore degrade to a pure-python install when
Cython or a C compiler is unavailable.
"""

from setuptools import Extension, setup

try:
    import numpy
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "critfield._speedups",
                ["src/critfield/_speedups.pyx"],
                include_dirs=[numpy.get_include()],
                # keep strict FP semantics so results match the numpy
                # fallback closely and stay reproducible across builds
                extra_compile_args=["-O3", "-ffp-contract=off"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)
