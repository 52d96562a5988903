import setuptools

from core_erlang_semantics import __version__, __author__, __author_email__

with open("requirements.txt", "r", encoding="utf-8") as rf:
    requirements = rf.read().splitlines()

with open("README.md", "r") as fh:
    long_description = fh.read()

setuptools.setup(
    name="core_erlang_semantics",
    version=__version__,
    author=__author__,
    author_email=__author_email__,
    description="Big-step semantics of sequential Core Erlang: evaluator, derivation checker and equivalence harness",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=setuptools.find_packages(exclude=["tests", "tests.*"]),
    entry_points={
        'console_scripts': [
            'cesem = core_erlang_semantics.entrypoints:main',
        ],
    },
    install_requires=requirements,
    extras_require={
        'test': ['pytest', 'hypothesis'],
    },
    python_requires='>=3.10',
)
