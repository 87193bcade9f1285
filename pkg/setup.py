"""Build shim for the optional compiled Hill-equation kernel.

The package works without the extension (a numpy fallback is selected at
import time), so any failure here must not break installation.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "trapcalc._kernels._hill_cy",
                ["src/trapcalc/_kernels/_hill_cy.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )
except Exception as exc:  # noqa: BLE001 - any build-chain gap means "no extension"
    print(f"trapcalc: building without compiled kernels ({exc})")

setup(ext_modules=ext_modules)
