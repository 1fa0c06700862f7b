from setuptools import setup, find_packages

setup(
    name="ags-qaoa",
    version="0.1.0",
    description="Closed-form QAOA angles for unstructured search from the adiabatic Grover schedule",
    author="Your Name",
    packages=find_packages(exclude=["tests"]),
    install_requires=[
        "click>=8.1.0",
        "numpy>=1.24",
        "scipy>=1.10",
    ],
    entry_points={
        "console_scripts": [
            "ags-qaoa=src.cli:main",
        ],
    },
    python_requires=">=3.8",
)
