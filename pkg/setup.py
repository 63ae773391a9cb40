from setuptools import setup, find_packages

setup(
    name="dot-workbench",
    version="1.0.0",
    packages=find_packages(exclude=["tests", "tests.*", "examples", "examples.*"]),
    install_requires=[
        "numpy>=1.24",
        "scipy>=1.11",
        "scikit-image>=0.21",
        "scikit-learn>=1.3",
        "numba>=0.58",
        "pydantic>=2.4.2",
        "pydantic-settings>=2.0.0",
        "prometheus-client>=0.17.1",
        "python-json-logger>=2.0.7",
    ],
    extras_require={
        "dev": [
            "pytest>=8.0.0",
            "pytest-cov>=4.1.0",
            "pytest-mock>=3.12.0",
            "black",
            "isort",
            "flake8",
            "mypy",
        ]
    },
    entry_points={"console_scripts": ["dot=src.app.main:main"]},
    python_requires=">=3.11",
)
