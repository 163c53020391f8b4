import os

from setuptools import Extension, setup


def _extensions():
    if os.environ.get("TIECONTAGION_NO_EXT"):
        return []
    try:
        from Cython.Build import cythonize
    except ImportError:
        return []
    ext = Extension(
        "tiecontagion.diffusion._ckernel",
        ["src/tiecontagion/diffusion/_ckernel.pyx"],
        extra_compile_args=["-O3"],
    )
    return cythonize([ext], language_level=3)


setup(ext_modules=_extensions())
