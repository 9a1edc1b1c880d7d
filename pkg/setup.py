from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext_modules = cythonize(
        [Extension("smalltime.kernels._ckernels",
                   ["src/smalltime/kernels/_ckernels.pyx"],
                   extra_compile_args=["-O3"],
                   optional=True)],
        language_level=3,
    )

setup(ext_modules=ext_modules)
