"""Build script: compiles the interpreter core with Cython when available.

The package works without the extension (the same source runs as plain
Python), so a missing compiler or missing Cython only costs speed.
"""

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """Never fail the install over the speedup module."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # pragma: no cover - toolchain dependent
            print(f"warning: building the compiled core failed ({exc}); "
                  "falling back to pure Python")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:  # pragma: no cover - toolchain dependent
            print(f"warning: {ext.name} failed to compile ({exc}); "
                  "falling back to pure Python")


try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [Extension("gasfuzz._interp", ["src/gasfuzz/_interp.py"])],
        compiler_directives={"language_level": "3"},
        quiet=True,
    )
except ImportError:  # pragma: no cover - Cython not installed
    ext_modules = []

setup(ext_modules=ext_modules, cmdclass={"build_ext": optional_build_ext})
