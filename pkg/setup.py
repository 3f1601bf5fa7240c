from setuptools import setup, find_packages
try:
    from sphinx.setup_command import BuildDoc
    cmdclass = {'build_sphinx': BuildDoc}
except ImportError:  # sphinx is only needed for building the docs
    cmdclass = {}

name = 'SwitchingSystem-identification'
version = '0.1'
release = '0.1.0'
author = 'Magnus Hagdorn'

setup(
    name=name,
    packages=find_packages(exclude=['tests']),
    version=release,
    include_package_data=True,
    install_requires=[
        "numpy>=1.20",
        "scipy>=1.9",
        "cvxpy>=1.4",
        "clarabel",
        "pandas>=1.5",
    ],
    cmdclass=cmdclass,
    command_options={
        'build_sphinx': {
            'project': ('setup.py', name),
            'version': ('setup.py', version),
            'release': ('setup.py', release),
            'copyright': ('setup.py', author),
            'source_dir': ('setup.py', 'docs')}},
    setup_requires=['sphinx'],
    extras_require={
        'docs': [
            'sphinx<4.0',
            'sphinx_rtd_theme',
        ],
        'lint': [
            'flake8>=3.5.0',
        ],
        'testing': [
            'pytest',
            'pytest-cov',
        ],
    },
    entry_points={
        'console_scripts': [
            'switchid=SwitchingSystem_identification.cli:main',
        ],
    },
    author=author,
    description=("identification of switching polynomial systems by"
                 " alternating convex relaxations"),
)
