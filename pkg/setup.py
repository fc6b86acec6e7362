# This makes Python treat this directory as containing packages.
# Help ensures relative imports work
from setuptools import setup, find_packages

setup(
    name='surfaceflow',
    version='1.0',
    packages=find_packages(exclude=['tests', 'examples', 'examples.*']),
    package_data={'surfaceflow': ['scenarios/*.toml']},
    install_requires=[
        'numpy',
        'scipy',
        'pandas',
        'tomli; python_version < "3.11"',
    ],
    extras_require={'test': ['pytest']},
    entry_points={
        'console_scripts': ['surfaceflow=surfaceflow.cli.Main:main'],
    },
)
