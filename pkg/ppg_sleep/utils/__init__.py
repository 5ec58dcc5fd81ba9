"""
Utilities package for the ppg-sleep package.

This package contains utility functions used throughout the package.
"""

from ppg_sleep.utils.helpers import (
	atomic_write,
	ensure_directory_exists,
	format_table,
	recording_name,
)
from ppg_sleep.utils.validators import (
	validate_finite,
	validate_min_length,
	validate_range,
	validate_strictly_increasing,
)

__all__ = [
	'atomic_write',
	'ensure_directory_exists',
	'format_table',
	'recording_name',
	'validate_finite',
	'validate_min_length',
	'validate_range',
	'validate_strictly_increasing',
]
