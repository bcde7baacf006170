from setuptools import setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        "src/coopkitchen/core/_engine_cy.pyx",
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    # Without Cython the package still installs; the engine falls back to
    # the pure-Python kernel at import time.
    ext_modules = []

setup(ext_modules=ext_modules)
