from setuptools import setup, find_packages
import codecs
import os


here = os.path.abspath(os.path.dirname(__file__))

with codecs.open(os.path.join(here, "Readme.md"), encoding="utf-8") as fh:
    long_description = "\n" + fh.read()


# Setting up
setup(
    name="qbcast",
    version='0.1.0',
    description='Capacity regions and broadcast CVQKD key rates of pure-loss bosonic broadcast channels',
    long_description_content_type="text/markdown",
    long_description=long_description,
    packages=find_packages(exclude=["test", "test.*"]),
    python_requires=">=3.8",
    install_requires=[
        'numpy',
        'scipy',
        'joblib',
    ],
    extras_require={
        "test": ["pytest"],
    },
    entry_points={
        "console_scripts": [
            "qbcast=qbcast:function",
        ],
    },
    keywords=['quantum broadcast channel', 'bosonic channel capacity', 'cvqkd', 'gaussian states'],
    classifiers=[
        "Intended Audience :: Science/Research",
        "Programming Language :: Python :: 3",
        "Topic :: Scientific/Engineering :: Physics",
        "Operating System :: Unix",
        "Operating System :: MacOS :: MacOS X",
        "Operating System :: Microsoft :: Windows",
    ]
)
