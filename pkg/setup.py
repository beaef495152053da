import setuptools

with open('README.md', 'r') as fh:
    long_description = fh.read()

setuptools.setup(
    name='covreg',
    version='0.1.0',
    description="Interpretable regression on data-dependent coverings of rules",
    long_description=long_description,
    long_description_content_type='text/markdown',
    packages=setuptools.find_packages(exclude=['tests']),
    package_data={'covreg': ['defaults.yaml']},
    install_requires=[
        'Django>=2.2',
        'joblib>=1.0',
        'numpy>=1.20',
        'pandas>=1.2',
        'PyYAML>=5.1',
    ],
    extras_require={
        'test': ['pytest>=6.0'],
    },
    entry_points={
        'console_scripts': ['covreg=covreg.cli:main'],
    },
    classifiers=[
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: BSD License",
        "Operating System :: OS Independent",
    ],
    python_requires='>=3.8',
)
