"""
Configuration management module for the ppg-sleep package.

This module handles loading and validating pipeline settings from yaml files,
with support for multiple profiles. Every tunable of the processing chain has a
default, so a configuration file is optional.
"""

import dataclasses
import logging
import os
from dataclasses import dataclass
from typing import Any, Dict, Optional, Tuple

import jsonschema
import yaml

from ppg_sleep.exceptions import ConfigurationError

logger = logging.getLogger(__name__)

DEFAULT_SETTINGS: Dict[str, Any] = {
	'channel': 'green',
	'epoch_s': 60.0,
	'motion_window_s': 1.0,
	'gravity_window_s': 2.0,
	'motion_threshold_g2': 0.01,
	'refractory_s': 0.3,
	'amplitude_floor_ratio': 0.3,
	'amplitude_history': 8,
	'beat_smoothing_s': 0.28,
	'plausible_min_ms': 300.0,
	'plausible_max_ms': 1500.0,
	'median_jump_ratio': 0.3,
	'median_history': 9,
	'max_consecutive_rejects': 9,
	'hr_window_beats': 10,
	'low_confidence_gap_s': 10.0,
	'resample_fs': 2.0,
	'hrv_band_hz': [0.04, 0.5],
	'filter_order': 2,
	'filter_corner_scale': [0.75, 1.2],
	'ar_order': 20,
	'nlms_mu': 0.05,
	'nlms_eps': 1e-8,
	'spectrum_step_s': 1.0,
	'grid_step_hz': 0.002,
	'grid_max_hz': 1.0,
	'resp_band_hz': [0.1, 0.5],
	'peak_half_width_hz': 0.02,
	'initial_rate_min': 15.0,
	'warmup_s': 60.0,
	'min_duration_s': 300.0,
	'br_update': 'linear',
	'dtw_band_min': 10,
	'dtw_band_fraction': 0.05,
	'ref_max_gap_s': 2.0,
}

_POSITIVE = {'type': 'number', 'exclusiveMinimum': 0}
_NON_NEGATIVE = {'type': 'number', 'minimum': 0}
_COUNT = {'type': 'integer', 'minimum': 1}
_BAND = {
	'type': 'array',
	'items': _POSITIVE,
	'minItems': 2,
	'maxItems': 2,
}

PROFILE_SCHEMA = {
	'type': 'object',
	'properties': {
		'channel': {'type': 'string', 'enum': ['green', 'ir']},
		'epoch_s': _POSITIVE,
		'motion_window_s': _POSITIVE,
		'gravity_window_s': _POSITIVE,
		'motion_threshold_g2': _NON_NEGATIVE,
		'refractory_s': _POSITIVE,
		'amplitude_floor_ratio': _NON_NEGATIVE,
		'amplitude_history': _COUNT,
		'beat_smoothing_s': _NON_NEGATIVE,
		'plausible_min_ms': _POSITIVE,
		'plausible_max_ms': _POSITIVE,
		'median_jump_ratio': _POSITIVE,
		'median_history': _COUNT,
		'max_consecutive_rejects': _COUNT,
		'hr_window_beats': _COUNT,
		'low_confidence_gap_s': _POSITIVE,
		'resample_fs': _POSITIVE,
		'hrv_band_hz': _BAND,
		'filter_order': _COUNT,
		'filter_corner_scale': _BAND,
		'ar_order': _COUNT,
		'nlms_mu': {'type': 'number', 'exclusiveMinimum': 0, 'exclusiveMaximum': 2},
		'nlms_eps': _NON_NEGATIVE,
		'spectrum_step_s': _POSITIVE,
		'grid_step_hz': _POSITIVE,
		'grid_max_hz': _POSITIVE,
		'resp_band_hz': _BAND,
		'peak_half_width_hz': _POSITIVE,
		'initial_rate_min': {'type': 'number', 'minimum': 6, 'maximum': 30},
		'warmup_s': _NON_NEGATIVE,
		'min_duration_s': _NON_NEGATIVE,
		'br_update': {'type': 'string', 'enum': ['linear', 'log']},
		'dtw_band_min': _COUNT,
		'dtw_band_fraction': _NON_NEGATIVE,
		'ref_max_gap_s': _POSITIVE,
	},
	'additionalProperties': False,
}

# Configuration schema for validation
CONFIG_SCHEMA = {'type': 'object', 'additionalProperties': PROFILE_SCHEMA}

DEFAULT_CONFIG_PATHS = [
	os.path.join(os.path.expanduser('~'), 'ppg_sleep.yaml'),
	os.path.join(os.getcwd(), 'ppg_sleep.yaml'),
]


@dataclass(frozen=True)
class PipelineSettings:
	"""Resolved pipeline settings for one profile."""

	channel: str
	epoch_s: float
	motion_window_s: float
	gravity_window_s: float
	motion_threshold_g2: float
	refractory_s: float
	amplitude_floor_ratio: float
	amplitude_history: int
	beat_smoothing_s: float
	plausible_min_ms: float
	plausible_max_ms: float
	median_jump_ratio: float
	median_history: int
	max_consecutive_rejects: int
	hr_window_beats: int
	low_confidence_gap_s: float
	resample_fs: float
	hrv_band_hz: Tuple[float, float]
	filter_order: int
	filter_corner_scale: Tuple[float, float]
	ar_order: int
	nlms_mu: float
	nlms_eps: float
	spectrum_step_s: float
	grid_step_hz: float
	grid_max_hz: float
	resp_band_hz: Tuple[float, float]
	peak_half_width_hz: float
	initial_rate_min: float
	warmup_s: float
	min_duration_s: float
	br_update: str
	dtw_band_min: int
	dtw_band_fraction: float
	ref_max_gap_s: float

	@classmethod
	def from_dict(cls, values: Dict[str, Any]) -> 'PipelineSettings':
		"""
		Build settings from a profile mapping, filling gaps with defaults.

		Args:
		    values: Profile mapping; keys not given fall back to DEFAULT_SETTINGS.

		Returns:
		    PipelineSettings: The resolved settings.

		"""
		merged = {**DEFAULT_SETTINGS, **values}
		for key in ('hrv_band_hz', 'filter_corner_scale', 'resp_band_hz'):
			merged[key] = tuple(float(v) for v in merged[key])
		return cls(**merged)

	def replace(self, **changes: Any) -> 'PipelineSettings':
		"""Return a copy with the given fields changed."""
		return dataclasses.replace(self, **changes)

	def to_dict(self) -> Dict[str, Any]:
		"""Return the settings as a plain dictionary."""
		return dataclasses.asdict(self)


class PipelineConfig:
	"""
	Class for handling pipeline configuration.

	Supports loading settings from YAML files with multiple profiles, so that
	parameter sweeps can live side by side in a single file.
	"""

	def __init__(self, config_file: Optional[str] = None, profile: str = 'default'):
		"""
		Initialize the pipeline configuration.

		Args:
		    config_file: Path to the configuration file. If None, will look in default locations.
		    profile: The profile to use from the configuration file.

		Raises:
		    ConfigurationError: If configuration cannot be loaded or is invalid.

		"""
		self.config_file = config_file
		self.profile = profile
		self.config = self._load_config()

		if self.config and self.profile not in self.config:
			available_profiles = list(self.config.keys())
			raise ConfigurationError(
				f"Profile '{self.profile}' not found in config. Available profiles: {available_profiles}"
			)

		self.profile_config = self.config.get(self.profile, {})
		self._check_consistency(self.profile_config)
		self.settings = PipelineSettings.from_dict(self.profile_config)

	def _load_config(self) -> Dict[str, Any]:
		"""
		Load and validate the configuration file.

		Returns:
		    Dict: The loaded configuration, empty when no file exists.

		Raises:
		    ConfigurationError: If the given configuration file is missing or invalid.

		"""
		if self.config_file:
			if not os.path.exists(self.config_file):
				raise ConfigurationError(
					f'Configuration file not found: {self.config_file}'
				)
			return self._read(self.config_file)

		for path in DEFAULT_CONFIG_PATHS:
			if os.path.exists(path):
				return self._read(path)

		logger.debug('No configuration file found, using built-in defaults')
		return {}

	def _read(self, path: str) -> Dict[str, Any]:
		try:
			with open(path) as f:
				config = yaml.safe_load(f) or {}
		except (OSError, yaml.YAMLError) as e:
			raise ConfigurationError(f'Error loading configuration file {path}: {e!s}')
		self._validate_config(config)
		logger.info(f'Loaded configuration from {path}')
		return config

	def _validate_config(self, config: Dict[str, Any]) -> None:
		"""
		Validate the configuration against the schema.

		Args:
		    config: The configuration to validate.

		Raises:
		    ConfigurationError: If the configuration is invalid.

		"""
		try:
			jsonschema.validate(config, CONFIG_SCHEMA)
		except jsonschema.exceptions.ValidationError as e:
			raise ConfigurationError(f'Invalid configuration: {e.message}')

	def _check_consistency(self, profile: Dict[str, Any]) -> None:
		merged = {**DEFAULT_SETTINGS, **profile}
		for key in ('hrv_band_hz', 'resp_band_hz'):
			low, high = merged[key]
			if low >= high:
				raise ConfigurationError(f'{key} must be increasing, got {merged[key]}')
		if merged['plausible_min_ms'] >= merged['plausible_max_ms']:
			raise ConfigurationError('plausible_min_ms must be below plausible_max_ms')
		if merged['refractory_s'] * 1000.0 >= merged['plausible_max_ms']:
			raise ConfigurationError('refractory_s must be shorter than plausible_max_ms')
		ratio = merged['epoch_s'] / merged['motion_window_s']
		if abs(ratio - round(ratio)) > 1e-9:
			raise ConfigurationError('epoch_s must be a whole multiple of motion_window_s')

	def get_available_profiles(self) -> list:
		"""
		Get a list of available profile names.

		Returns:
		    List: Names of available profiles.

		"""
		return list(self.config.keys()) or ['default']
