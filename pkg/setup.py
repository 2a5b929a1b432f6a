from setuptools import setup, find_packages

setup(
    name="fracsoft",
    version="0.1",
    packages=find_packages(exclude=["tests", "examples"]),
    install_requires=[
        'numpy>=1.24.0',
        'scipy>=1.10.0',
        'sqlalchemy>=2.0.0',
        'pydantic>=2.0.0',
        'python-dotenv>=1.0.0',
    ],
    extras_require={
        'test': ['pytest>=7.0.0'],
    },
    entry_points={
        'console_scripts': ['fracsoft=main:main'],
    },
    py_modules=['main'],
    python_requires='>=3.9',
)
