"""Build script. The compiled kernel is an optional speedup: if Cython or a C
compiler is unavailable, the install proceeds and the package falls back to
the pure-numpy backend at import time."""

from setuptools import setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """build_ext that degrades to a pure-Python install on compiler failure."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # missing compiler / headers
            print(f"compiled kernel skipped: {exc}")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"compiled kernel {ext.name} skipped: {exc}")


extensions = []
try:
    from Cython.Build import cythonize

    extensions = cythonize(
        "src/diskflow/_kernel/_native.pyx",
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    pass

setup(
    ext_modules=extensions,
    cmdclass={"build_ext": optional_build_ext},
)
