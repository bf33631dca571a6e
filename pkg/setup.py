from setuptools import find_packages, setup

setup(
    name="randers_curvature",
    version="0.1.0",
    packages=find_packages(include=["randers_curvature*"]),
    install_requires=[
        "awesomeversion>=25.5.0",
        "lark>=1.1.0",
        "numpy>=1.22.0",
        "scipy>=1.11.0",
        "voluptuous>=0.13.1",
    ],
    entry_points={"console_scripts": ["randers-curvature=randers_curvature.cli:main"]},
)
