from setuptools import setup

setup(
    name='equiaffine',
    version='0.1.0',
    packages=['equiaffine',
              'data',
              'scripts',
              ],
    package_data={'data': ['catalog/*.json']},
    install_requires=['numpy', 'scipy', 'pandas', 'joblib', 'tqdm'],
    extras_require={'test': ['pytest']},
    entry_points={'console_scripts': ['equiaffine = equiaffine.cli:main']},
    url='',
    license='',
    description='Frenet and equi-affine curvatures of curves in pseudo-Riemannian 2-manifolds'
)
