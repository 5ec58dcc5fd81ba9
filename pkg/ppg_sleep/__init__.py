"""
ppg-sleep - Heart rate and breathing rate from wrist PPG during sleep.

This package detects beats in wrist photoplethysmography, gates them with an
accelerometer motion mask, corrects the beat-to-beat intervals and estimates
heart rate and breathing rate from them, split into a device stage and a
server stage exchanging a compact feature format.
"""

__version__ = '0.1.0'

from ppg_sleep.config import PipelineConfig, PipelineSettings
from ppg_sleep.exceptions import (
	ConfigurationError,
	DecodeError,
	InsufficientDataError,
	ParseError,
	PPGSleepError,
	SchemaError,
	ValidationError,
)

__all__ = [
	'ConfigurationError',
	'DecodeError',
	'InsufficientDataError',
	'PPGSleepError',
	'ParseError',
	'PipelineConfig',
	'PipelineSettings',
	'SchemaError',
	'ValidationError',
]
