"""
Exceptions module for the ppg-sleep package.

This module defines custom exceptions used throughout the package. Every
exception carries the process exit code the command-line interface uses
when it is the reason a command fails.
"""

from typing import Optional


class PPGSleepError(Exception):
	"""Base exception for all ppg-sleep errors."""

	exit_code = 1


class ConfigurationError(PPGSleepError):
	"""Exception raised for configuration errors."""

	exit_code = 2


class ParseError(PPGSleepError):
	"""Exception raised when a CSV row cannot be parsed."""

	exit_code = 3

	def __init__(self, message: str, line: Optional[int] = None):
		"""
		Initialize ParseError.

		Args:
		    message: Error message.
		    line: 1-based line number of the offending row in the file.

		"""
		self.line = line
		if line is not None:
			message = f'line {line}: {message}'
		super().__init__(message)


class SchemaError(PPGSleepError):
	"""Exception raised when a CSV file lacks required columns or rows."""

	exit_code = 4


class DecodeError(PPGSleepError):
	"""Exception raised for truncated or corrupt feature streams."""

	exit_code = 5

	def __init__(self, message: str, offset: int):
		"""
		Initialize DecodeError.

		Args:
		    message: Error message.
		    offset: Byte offset in the stream where decoding failed.

		"""
		self.offset = offset
		super().__init__(f'{message} (byte offset {offset})')


class InsufficientDataError(PPGSleepError):
	"""Exception raised when a series is too short for an operation."""

	exit_code = 6


class ValidationError(PPGSleepError):
	"""Exception raised for invalid arguments."""

	exit_code = 7


class InvalidSeriesError(ValidationError):
	"""Exception raised for malformed or mismatched series."""


class InvalidGridError(ValidationError):
	"""Exception raised for frequency grids outside the usable range."""


class InvalidGainError(ValidationError):
	"""Exception raised for learning gains outside [0, 1]."""


class InvalidParamError(ValidationError):
	"""Exception raised for out-of-range generator parameters."""


class InvalidInputError(ValidationError):
	"""Exception raised for mismatched metric inputs."""


class ZeroReferenceError(ValidationError):
	"""Exception raised when a percentage error has a zero reference."""


class NonFiniteInputError(ValidationError):
	"""Exception raised when an adaptive filter receives NaN or inf."""


class BoundaryIndexError(ValidationError):
	"""Exception raised when a peak index has no neighbour on one side."""


class SpectrumError(ValidationError):
	"""Exception raised when an AR spectrum is not finite."""
