from setuptools import setup, find_packages

setup(
    name="robust-bocd",
    version="0.1.0",
    description="Robust and scalable Bayesian online changepoint detection with diffusion score matching",
    packages=find_packages(where="src"),
    package_dir={"": "src"},
    install_requires=[
        "textual>=0.45.0",
        "click>=8.0.0",
        "numpy>=1.22",
        "scipy>=1.10",
        "pandas>=1.5",
        "pydantic>=2.0",
    ],
    extras_require={
        "dev": [
            "pytest>=7.0.0",
            "pytest-asyncio>=0.21.0",
            "black>=22.0.0",
            "flake8>=5.0.0",
        ]
    },
    entry_points={
        "console_scripts": [
            "robust-bocd=cli.main:cli",
            # Short alias
            "rbocd=cli.main:cli",
        ]
    },
    python_requires=">=3.9",
)
