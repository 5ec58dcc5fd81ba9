"""
Validators module for the ppg-sleep package.

This module provides validation functions for numeric inputs.
"""

from typing import Type

import numpy as np

from ppg_sleep.exceptions import (
	InsufficientDataError,
	InvalidSeriesError,
	ValidationError,
)


def validate_min_length(values: np.ndarray, minimum: int, what: str = 'series') -> bool:
	"""
	Validate that a sequence holds at least ``minimum`` samples.

	Args:
	    values: The sequence to check.
	    minimum: Smallest acceptable length.
	    what: Name used in the error message.

	Returns:
	    bool: True if the sequence is long enough.

	Raises:
	    InsufficientDataError: If the sequence is too short.

	"""
	if len(values) < minimum:
		raise InsufficientDataError(
			f'{what} needs at least {minimum} samples, got {len(values)}'
		)
	return True


def validate_strictly_increasing(times: np.ndarray, what: str = 'times') -> bool:
	"""
	Validate that a time vector is strictly increasing.

	Args:
	    times: The timestamps to check.
	    what: Name used in the error message.

	Returns:
	    bool: True if the timestamps are strictly increasing.

	Raises:
	    InvalidSeriesError: If any step is zero or negative.

	"""
	if len(times) > 1 and not np.all(np.diff(times) > 0):
		first = int(np.argmax(np.diff(times) <= 0))
		raise InvalidSeriesError(
			f'{what} must be strictly increasing (violation at index {first + 1})'
		)
	return True


def validate_finite(values: np.ndarray, what: str = 'values') -> bool:
	"""
	Validate that every value is finite.

	Raises:
	    InvalidSeriesError: If a NaN or infinity is present.

	"""
	if not np.all(np.isfinite(values)):
		raise InvalidSeriesError(f'{what} contains non-finite entries')
	return True


def validate_range(
	value: float,
	low: float,
	high: float,
	name: str,
	error: Type[ValidationError] = ValidationError,
) -> bool:
	"""
	Validate that a scalar parameter lies within a closed interval.

	Args:
	    value: The value to check.
	    low: Lower bound (inclusive).
	    high: Upper bound (inclusive).
	    name: Parameter name used in the error message.
	    error: Exception class to raise.

	Returns:
	    bool: True if the value is inside the interval.

	Raises:
	    ValidationError: The given subclass, if the value is outside.

	"""
	if not low <= value <= high:
		raise error(f'{name} must lie in [{low}, {high}], got {value}')
	return True
