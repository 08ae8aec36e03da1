import setuptools

with open("README.md", "r") as fh:
    long_description = fh.read()

setuptools.setup(
    name="ITSBound",
    version="0.1.0",
    description="Worst-case runtime bounds for integer transition systems using multiphase ranking functions and control-flow refinement.",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=setuptools.find_packages(exclude=["tests", "tests.*"]),
    classifiers=[
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: GNU General Public License v3 or later (GPLv3+)",
        "Operating System :: OS Independent",
        "Intended Audience :: Science/Research",
        "Topic :: Software Development :: Quality Assurance",
    ],
    python_requires='>=3.7',
    install_requires=['lark>=1.1', 'z3-solver>=4.8'],
    entry_points={'console_scripts': ['itsbound=ITSBound.cli:main']},
)
