from setuptools import setup


with open('README.md') as f:
    readme = f.read()

install_requires = ['numpy>=1.17.0', 'scipy>=1.3.0', 'networkx>=2.4']

setup(
    name='msrrlib',
    version='0.1.0',
    description='Simulation of high-level missions for modular self-reconfigurable robots.',
    long_description=readme,
    author='Nikolas Hemion',
    author_email='nikolas@hemion.org',
    packages=['msrrlib'],
    package_data={'msrrlib': ['data/*.json', 'data/demo*/*']},
    install_requires=install_requires,
    extras_require={'test': ['pytest']},
    entry_points={'console_scripts': ['msrr=msrrlib.cli:main']}
)
