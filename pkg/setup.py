from setuptools import setup, find_packages

with open("README.md", "r", encoding="utf-8") as fh:
    long_description = fh.read()

setup(
    name="chebrisk",
    version="0.1.0",
    description="Risk bounds for polynomial chance constraints from Chebyshev moments and SOS indicator certificates",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=find_packages(exclude=["tests", "tests.*", "scripts"]),
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "Topic :: Scientific/Engineering :: Mathematics",
        "License :: OSI Approved :: MIT License",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.11",
    ],
    python_requires=">=3.10",
    install_requires=[
        "numpy>=1.26.0",
        "scipy>=1.11.0",
        "pydantic>=2.4.0",
        "python-dotenv>=1.0.0",
        "aiofiles>=23.2.0",
    ],
    entry_points={
        "console_scripts": [
            "chebrisk=chebrisk.cli:run",
        ],
    },
)
