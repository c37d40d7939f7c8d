from setuptools import setup, find_packages

with open("README.md", "r", encoding="utf-8") as fh:
    long_description = fh.read()

setup(
    name="segtransfer",
    version="0.1.0",
    author="Your Name",
    author_email="your.email@example.com",
    description="Adversarial and transferable attacks on semantic segmentation models",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=find_packages(where="src"),
    package_dir={"":"src"},
    classifiers=[
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
    ],
    python_requires=">=3.9",
    install_requires=[
        "numpy>=1.24.2",
        "scipy>=1.10.0",
        "torch>=2.0.0",
        "Pillow>=9.5.0",
        "pydantic>=2.4.0",
        "pydantic-settings>=2.0.3",
        "python-dotenv>=1.0.0",
        "reportlab>=3.6.13",
        "dataclasses-json>=0.5.7",
    ],
    entry_points={
        "console_scripts": [
            "segtransfer=segtransfer.main:main",
        ],
    },
)
