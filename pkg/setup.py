#!/usr/bin/env python
# -*- coding: utf-8 -*-

try:
    from setuptools import setup
except ImportError:
    from distutils.core import setup


with open("README.md") as f:
    readme = f.read()


VERSION = "0.1.0"


setup(
    name="isoquant",
    version=VERSION,
    description="Optimal quantized isotonic calibration, in batch or streaming",
    long_description=readme,
    long_description_content_type="text/markdown",
    packages=["isoquant"],
    include_package_data=True,
    install_requires=["PyYAML", "numpy"],
    extras_require={
        "test": ["pytest", "toml", "mypy", "types-PyYAML", "types-toml"],
        "docs": ["sphinx"],
    },
    tests_require=["isoquant[test]"],
    entry_points={"console_scripts": ["isoquant=isoquant.cli:main"]},
    python_requires=">=3.9",
    license="MIT",
    zip_safe=False,
    keywords="isotonic regression calibration quantization",
    classifiers=[
        "Development Status :: 4 - Beta",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: MIT License",
        "Natural Language :: English",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Programming Language :: Python :: 3.12",
        "Topic :: Scientific/Engineering :: Mathematics",
    ],
    test_suite="test",
)
