from setuptools import find_packages, setup

with open('README.md', encoding='utf-8') as fh:
	long_description = fh.read()

setup(
	name='ppg-sleep',
	version='0.1.0',
	description='Heart rate and breathing rate from wrist PPG during sleep',
	long_description=long_description,
	long_description_content_type='text/markdown',
	packages=find_packages(exclude=['tests', 'tests.*']),
	classifiers=[
		'Development Status :: 4 - Beta',
		'Intended Audience :: Science/Research',
		'Programming Language :: Python :: 3',
		'Programming Language :: Python :: 3.9',
		'Programming Language :: Python :: 3.11',
		'Programming Language :: Python :: 3.12',
		'License :: OSI Approved :: MIT License',
		'Operating System :: OS Independent',
		'Topic :: Scientific/Engineering :: Medical Science Apps.',
	],
	python_requires='>=3.9',
	install_requires=[
		'numpy>=1.22',
		'scipy>=1.8',
		'pandas>=1.4',
		'numba>=0.56',
		'pyyaml>=5.4.1',
		'click>=8.0.0',
		'jsonschema>=3.2.0',
		'tqdm>=4.60',
	],
	extras_require={'dev': ['pytest>=7.0', 'ruff>=0.11']},
	entry_points={'console_scripts': ['ppg-sleep=ppg_sleep.cli:main']},
	include_package_data=True,
)
