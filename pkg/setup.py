"""ubp

Universal H-linear portfolio selection: the universal portfolio over
multilinear trading strategies, its best-in-hindsight benchmark and the
competitive ratio bound that ties them together.
"""

from setuptools import setup

setup(
    name="ubp",
    version="0.1.0",
    packages=["ubp", "ubp.builtin"],
    python_requires=">=3.8",
    install_requires=["numpy", "scipy", "entrypoints"],
    entry_points={
        "console_scripts": ["ubp=ubp.cli:main"],
        "ubp.formats": [
            "csv=ubp.builtin.csv:CSV",
            "json=ubp.builtin.json:JSON",
        ]
    },
    test_suite="tests",
)
