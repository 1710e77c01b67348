from setuptools import setup, find_packages
import pslab

with open('README.rst', 'r') as fd:
    long_description = fd.read()

setup(
    name = 'pslab',
    version = pslab.__version__,
    description = 'Numerical experiments on Patterson-Sullivan measures, critical exponents and Hilbert geometry for discrete subgroups of SL(d,R).',
    long_description = long_description,
    packages = find_packages(
        exclude = [
            'pslab.tests',
        ],
    ),
    zip_safe=False,
    include_package_data = True,
    install_requires=[
        'Django>=3.1',
        'numpy>=1.17',
        'scipy>=1.4',
        'mpmath>=1.1',
    ],
    entry_points = {
        'console_scripts': [
            'pslab = pslab.__main__:main',
        ],
    },
    classifiers = [
        "Development Status :: 4 - Beta",
        "Framework :: Django",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: BSD License",
        "Operating System :: OS Independent",
        "Programming Language :: Python :: 3.6",
        "Programming Language :: Python :: 3.7",
        "Programming Language :: Python :: 3.8",
        "Topic :: Scientific/Engineering :: Mathematics",
    ]
)
