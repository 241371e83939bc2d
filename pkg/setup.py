#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""The setup script."""

from setuptools import setup, find_packages

with open('README.rst') as readme_file:
    readme = readme_file.read()

requirements = ["click", "h5py", "matplotlib", "numpy", "pillow", "pytest",
                "pyyaml", "torch"]

setup_requirements = ['pytest-runner', 'pytest']

setup(
    author="pksynth developers",
    classifiers=[
        'Development Status :: 2 - Pre-Alpha',
        'Intended Audience :: Science/Research',
        'License :: OSI Approved :: MIT License',
        'Natural Language :: English',
        'Programming Language :: Python :: 3.12',
        'Topic :: Scientific/Engineering :: Medical Science Apps.',
    ],
    description="Calibrationless parallel MRI with partition-based "
                "k-space synthesis",
    entry_points={
        'console_scripts': [
            'pksynth=pksynth.cli:main',
        ],
    },
    install_requires=requirements,
    license="MIT license",
    long_description=readme,
    package_data={
        'pksynth': ['configs/*.yaml']
    },
    include_package_data=True,
    keywords='pksynth',
    name='pksynth',
    packages=find_packages(include=[
        'pksynth',
        'pksynth.ext',
        'pksynth.ext._masks',
        'pksynth.ext._phantom',
        'pksynth.ext._reporter',
        'pksynth.util']),
    setup_requires=setup_requirements,
    version='0.1.0',
    zip_safe=False,
)
