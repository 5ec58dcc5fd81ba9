"""
Signal-processing stages of the ppg-sleep package.

The device stage (motion, beats) turns raw PPG and acceleration into
beat-to-beat intervals and motion powers; the server stage (cardio,
respiration) turns those into corrected intervals, heart rate and breathing
rate. Synth generates recordings with known ground truth.
"""

from ppg_sleep.signals.beats import beats_to_intervals, detect_beats
from ppg_sleep.signals.cardio import correct_intervals, flag_intervals, heart_rate
from ppg_sleep.signals.codec import decode_features, encode_features
from ppg_sleep.signals.core import (
	BBIFlag,
	BBISeries,
	BeatSeries,
	FeatureRecord,
	TimedSeries,
	UniformSeries,
	resample_linear,
)
from ppg_sleep.signals.motion import MotionMask, accel_norm, motion_mask, motion_power, remove_gravity
from ppg_sleep.signals.respiration import RespirationParams, breathing_pipeline

__all__ = [
	'BBIFlag',
	'BBISeries',
	'BeatSeries',
	'FeatureRecord',
	'MotionMask',
	'RespirationParams',
	'TimedSeries',
	'UniformSeries',
	'accel_norm',
	'beats_to_intervals',
	'breathing_pipeline',
	'correct_intervals',
	'decode_features',
	'detect_beats',
	'encode_features',
	'flag_intervals',
	'heart_rate',
	'motion_mask',
	'motion_power',
	'remove_gravity',
	'resample_linear',
]
