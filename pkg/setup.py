from pathlib import Path

import setuptools

setuptools.setup(
    name="blocklynft",
    description="Blockly block programs driving a simulated IoT plant and a mutable-metadata NFT ledger",
    long_description=(Path(__file__).parent / "README.md").read_text(),
    long_description_content_type="text/markdown",
    platforms=["any"],
    packages=setuptools.find_packages(exclude=["tests"]),
    package_data={"blocklynft": ["data/*.xml", "data/*.json"]},
    use_scm_version={
        "write_to": "blocklynft/version.py",
        "write_to_template": "BLOCKLYNFT_VERSION_STRING = '{version}'",
        "local_scheme": "no-local-version",
        "fallback_version": "0.1.0",
    },
    setup_requires=["setuptools_scm"],
    entry_points={"console_scripts": ["blocklynft=blocklynft.blocklynft_main:main"]},
    license="MIT",
    classifiers=[
        "Intended Audience :: Education",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
        "Programming Language :: Python :: 3",
        "Topic :: Education",
    ],
    install_requires=["llsd>=1.2.4", "pydot", "lxml>=4.6", "flask>=2.2"],
    extras_require={
        "dev": ["pytest", "pytest-cov", "hypothesis"],
        "build": ["build", "setuptools_scm"],
    },
    python_requires=">=3.8",
)
