#!/usr/bin/env python3

import setuptools

with open("README.md", "r") as fh:
    long_description = fh.read()

setuptools.setup(
    name="genent",
    version="0.1.0",
    description="Construct multipartite quantum states from bipartite blocks and certify their entanglement",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=setuptools.find_packages(exclude=["tests"]),
    classifiers=[
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: GNU General Public License (GPL)",
        "Operating System :: POSIX :: Linux",
        "Intended Audience :: Science/Research",
        "Topic :: Scientific/Engineering :: Physics",
    ],
    python_requires=">=3.8",
    install_requires=[
        "Jinja2>=3.0",
        "PyYAML",
        "tabulate",
        "deepdiff",
        "numpy",
        "scipy>=1.4",
        # Other package dependencies
    ],
    extras_require={
        "dev": [
            "pytest",
            "black",
            "flake8",
            # Other development dependencies
        ]
    },
    package_data={
        "genent": [
            "report.txt",
            "sample_config.yaml",
        ],
    },
    entry_points={
        "console_scripts": [
            "genent = genent.cli:main",
            "genent_report_diff = genent.report:main_diff",
            "genent_report = genent.report:main_report",
        ],
    },
)
