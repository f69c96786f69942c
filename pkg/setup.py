from setuptools import setup, find_packages
import re

# read the contents of your README file
from os import path

with open("README.md") as f:
    long_description = f.read()

verstr = "unknown"
try:
    verstrline = open("fas_uav_relay/_version.py", "rt").read()
except EnvironmentError:
    pass
else:
    VSRE = r"^__version__ = ['\"]([^'\"]*)['\"]"
    mo = re.search(VSRE, verstrline, re.M)
    if mo:
        verstr = mo.group(1)
    else:
        raise RuntimeError("unable to find version in fas_uav_relay/_version.py")

setup(
    name="fas_uav_relay",
    packages=find_packages(exclude=["tests", "scripts"]),
    package_data={"fas_uav_relay": ["presets/*.cfg"]},
    description="Finite blocklength BLER and energy efficiency of a UAV relay "
    "with a fluid antenna receiver",
    long_description=long_description,
    long_description_content_type="text/markdown",
    python_requires=">=3.8.0",
    version=verstr,
    install_requires=[
        "numpy",
        "scipy",
        "pandas>=1.5",
        "xarray",
        "tqdm",
        "coloredlogs",
    ],
    entry_points={"console_scripts": ["fas-uav-relay=fas_uav_relay.cli:main"]},
)
