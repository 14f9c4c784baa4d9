"""Build the optional compiled search kernels; the package works without them."""
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    # pure-Python install; rbplan.kernels falls back automatically
    setup()
else:
    extensions = [
        Extension(
            "rbplan._ckernels",
            sources=["src/rbplan/_ckernels.pyx"],
            language="c++",
            extra_compile_args=["-O3", "-std=c++17"],
        )
    ]
    setup(ext_modules=cythonize(extensions, compiler_directives={"language_level": 3}))
