from setuptools import Extension, setup
from Cython.Build import cythonize

extensions = [
    Extension("qswitch._kernels", ["src/qswitch/_kernels.pyx"]),
]

setup(ext_modules=cythonize(extensions, language_level=3))
