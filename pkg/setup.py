#!/usr/bin/env python
# vim: sw=4:ts=4:sts=4:fdm=indent:fdl=0:
# -*- coding: UTF8 -*-
#
# Build ldpcompress package.
# Copyright (C) 2026 The ldpcompress developers
#
# This program is free software: you can redistribute it and/or modify
# it under the terms of the GNU General Public License as published by
# the Free Software Foundation, either version 3 of the License, or
# (at your option) any later version.
#
# This program is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
# GNU General Public License for more details.
#
# You should have received a copy of the GNU General Public License
# along with this program.  If not, see <http://www.gnu.org/licenses/>.


"""Build ldpcompress package."""

from setuptools import setup

setup(
    name='ldpcompress',
    packages=['ldp_compress'],
    package_dir={'ldp_compress': 'ldp_compress'},
    scripts=['scripts/ldpcompress'],
    version='1.0.0',
    description='Seed compression of local differential privacy reports.',
    long_description=open('README.mkd').read(),
    long_description_content_type='text/markdown',
    python_requires='>=3.9',
    install_requires=['numpy>=1.22', 'scipy>=1.8'],
    extras_require={'tests': ['pytest>=7']},
    author='The ldpcompress developers',
    license='LICENSE.txt',
    keywords=['privacy', 'local differential privacy', 'compression',
              'frequency estimation', 'mean estimation'],
    classifiers=[
        'Programming Language :: Python :: 3',
        'Development Status :: 4 - Beta',
        'Environment :: Console',
        'Intended Audience :: Science/Research',
        'Intended Audience :: Developers',
        'License :: OSI Approved :: GNU General Public License v3 (GPLv3)',
        'Operating System :: POSIX :: Linux',
        'Topic :: Scientific/Engineering :: Mathematics',
        'Topic :: Security :: Cryptography',
    ],
)
