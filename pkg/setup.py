"""Build script for the compiled slot kernel.

The extension is optional: if compilation fails (no C compiler, no Cython)
the package installs anyway and falls back to the numpy kernel at import
time.  The kernel uses typed memoryviews only, so it does not need the
numpy C API or include directories.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext = Extension(
        "tfqss._slotkernel",
        sources=["src/tfqss/_slotkernel.pyx"],
        optional=True,
    )
    ext_modules = cythonize(
        [ext],
        language_level=3,
        compiler_directives={
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )

setup(ext_modules=ext_modules)
