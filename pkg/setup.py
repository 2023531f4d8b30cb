#!/usr/bin/env python
# -*- coding: utf-8 -*-

from crossing_sim.version import __version__

from setuptools import setup, find_packages


with open('README.md') as f:
    long_description = f.read()

setup(
    name='CrossingSim',
    version=__version__,

    description='pedestrian road crossing decisions in continuous traffic',
    long_description=long_description,
    long_description_content_type='text/markdown',

    author='CrossingSim developers',

    license='MIT',
    packages=find_packages(),
    python_requires='>=3.7',

    tests_require=['pytest', 'hypothesis'],
    install_requires=['numpy>=1.17', 'scipy>=1.4', 'joblib'],
    extras_require={
        'test': ['pytest', 'hypothesis'],
    },
    include_package_data=True,

    entry_points={
        'console_scripts': ['crossing-sim = crossing_sim.app:main'],
    }
)
