import setuptools
from mapruin.version import __version__

with open('README.md', 'r') as fh:
    long_description = fh.read()

setuptools.setup(name='mapruin',
                 version=__version__,
                 description='Hitting probabilities of Markov additive processes with upward jumps',
                 long_description=long_description,
                 long_description_content_type="text/markdown",
                 classifiers=[
                     'Development Status :: 4 - Beta',
                     'License :: OSI Approved :: Apache Software License',
                     'Programming Language :: Python :: 3.8',
                     'Programming Language :: Python :: 3.9',
                     'Programming Language :: Python :: 3.10',
                     'Topic :: Scientific/Engineering :: Mathematics',
                 ],
                 keywords='markov additive process ruin probability fluid queue lundberg',
                 author='Happy Gears, Inc',
                 license='Apache',
                 packages=setuptools.find_packages(exclude=['tests']),
                 python_requires='>=3.8',
                 install_requires=[
                     'numpy', 'scipy>=1.7', 'networkx', 'pyhocon', 'tabulate', 'pandas'
                 ],
                 extras_require={
                     'test': ['hypothesis'],
                 },
                 package_data={'mapruin': ['defaults.conf', 'models/*.conf']},
                 scripts=['bin/mapruin'],
                 include_package_data=True,
                 zip_safe=False)
