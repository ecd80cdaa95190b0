from pybind11.setup_helpers import Pybind11Extension, build_ext
from setuptools import setup

ext_modules = [
    Pybind11Extension(
        "stbcmud._stbcmud",
        [
            "bindings/py_module.cpp",
            "src/cxmat.cpp",
            "src/stcodes.cpp",
            "src/fading.cpp",
            "src/detect.cpp",
            "src/analysis.cpp",
            "src/harness.cpp",
        ],
        include_dirs=["include", "vendor"],
        cxx_std=20,
    )
]

setup(ext_modules=ext_modules, cmdclass={"build_ext": build_ext})
