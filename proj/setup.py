"""CMake-driven extension build for the dcfair python package.

`pip install .` (or `pip install -e . --no-build-isolation`) configures the
CMake project, builds the `_dcfair` pybind11 module, and drops it inside
the package. The C++ library, CLI, and test suites build through CMake
directly; this file only bridges the extension into a wheel.
"""

import subprocess
import sys
from pathlib import Path

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class CMakeExtension(Extension):
    def __init__(self, name: str):
        super().__init__(name, sources=[])


class CMakeBuild(build_ext):
    def build_extension(self, ext: CMakeExtension) -> None:
        source_dir = Path(__file__).resolve().parent
        build_dir = Path(self.build_temp) / "cmake"
        build_dir.mkdir(parents=True, exist_ok=True)
        out_dir = Path(self.get_ext_fullpath(ext.name)).resolve().parent

        subprocess.run(
            [
                "cmake",
                "-S", str(source_dir),
                "-B", str(build_dir),
                "-DCMAKE_BUILD_TYPE=Release",
                "-DDCFAIR_BUILD_TESTS=OFF",
                "-DDCFAIR_BUILD_PYTHON=ON",
                f"-DPython3_EXECUTABLE={sys.executable}",
                f"-DCMAKE_LIBRARY_OUTPUT_DIRECTORY={out_dir}",
            ],
            check=True,
        )
        subprocess.run(
            ["cmake", "--build", str(build_dir), "--target", "_dcfair", "-j"],
            check=True,
        )


setup(
    ext_modules=[CMakeExtension("dcfair._dcfair")],
    cmdclass={"build_ext": CMakeBuild},
)
