from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    # optional=True: a failed compile falls back to the pure-python kernels
    ext_modules = cythonize(
        [Extension("dnlslab._kernels", ["src/dnlslab/_kernels.pyx"], optional=True)],
        language_level=3,
    )

setup(ext_modules=ext_modules)
