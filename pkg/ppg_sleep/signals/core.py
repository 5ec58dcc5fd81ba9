"""
Core time-series types for the ppg-sleep package.

This module defines the immutable series types shared by every processing
stage (uniformly sampled signals, beat times, beat-to-beat intervals, rate
traces and the device feature record) and the linear resampler that turns
irregular interval series into uniformly sampled ones.
"""

import math
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Iterable, Optional, Sequence, Tuple, Union

import numpy as np

from ppg_sleep.exceptions import InvalidSeriesError
from ppg_sleep.utils.validators import (
	validate_finite,
	validate_min_length,
	validate_strictly_increasing,
)

# Onset offsets are 32-bit, intervals 16-bit on the wire.
MAX_OFFSET_MS = 2**32 - 1
MAX_INTERVAL_MS = 2**16 - 1


def _frozen_array(values, dtype=np.float64) -> np.ndarray:
	array = np.array(values, dtype=dtype, copy=True).reshape(-1)
	array.setflags(write=False)
	return array


class BBIFlag(IntEnum):
	"""Quality state of one beat-to-beat interval."""

	VALID = 0
	IMPLAUSIBLE = 1
	MOTION = 2
	INTERPOLATED = 3


@dataclass(frozen=True, eq=False)
class UniformSeries:
	"""
	A uniformly sampled signal.

	Attributes:
	    values: Sample values; the unit depends on the signal.
	    fs: Sampling frequency in Hz (samples per unit of the time axis).
	    t0: Time of the first sample in seconds.

	Sample ``k`` lies at ``t0 + k / fs``. The same type holds spectra, in which
	case the axis is frequency, ``t0`` the first grid frequency and ``fs`` the
	number of grid points per Hz.

	"""

	values: np.ndarray
	fs: float
	t0: float = 0.0

	def __post_init__(self):
		object.__setattr__(self, 'values', _frozen_array(self.values))
		if not (self.fs > 0 and math.isfinite(self.fs)):
			raise InvalidSeriesError(f'Sampling frequency must be positive, got {self.fs}')
		object.__setattr__(self, 'fs', float(self.fs))
		object.__setattr__(self, 't0', float(self.t0))

	def __len__(self) -> int:
		return len(self.values)

	@property
	def times(self) -> np.ndarray:
		"""Sample times, ``t0 + k / fs``."""
		return self.t0 + np.arange(len(self.values)) / self.fs

	@property
	def duration(self) -> float:
		"""Covered span in seconds, ``len / fs``."""
		return len(self.values) / self.fs

	def with_values(self, values: Sequence[float]) -> 'UniformSeries':
		"""Return a series on the same time base with new values."""
		return UniformSeries(values, self.fs, self.t0)


@dataclass(frozen=True, eq=False)
class TimedSeries:
	"""
	An irregularly sampled trace such as heart rate, breathing rate or a reference.

	Attributes:
	    times: Sample times in seconds.
	    values: Sample values.
	    low_confidence: Per-sample flag set where the value was derived from a
	        long run of interpolated intervals.

	"""

	times: np.ndarray
	values: np.ndarray
	low_confidence: Optional[np.ndarray] = None

	def __post_init__(self):
		object.__setattr__(self, 'times', _frozen_array(self.times))
		object.__setattr__(self, 'values', _frozen_array(self.values))
		if len(self.times) != len(self.values):
			raise InvalidSeriesError(
				f'times and values differ in length ({len(self.times)} != {len(self.values)})'
			)
		flags = (
			np.zeros(len(self.times), dtype=bool)
			if self.low_confidence is None
			else self.low_confidence
		)
		flags = _frozen_array(flags, dtype=bool)
		if len(flags) != len(self.times):
			raise InvalidSeriesError('low_confidence must match the series length')
		object.__setattr__(self, 'low_confidence', flags)

	def __len__(self) -> int:
		return len(self.times)


@dataclass(frozen=True, eq=False)
class BeatSeries:
	"""
	Beat timestamps in seconds at fractional-sample resolution.

	Attributes:
	    times: Strictly increasing beat times.

	"""

	times: np.ndarray

	def __post_init__(self):
		object.__setattr__(self, 'times', _frozen_array(self.times))
		validate_finite(self.times, 'beat times')
		validate_strictly_increasing(self.times, 'beat times')

	def __len__(self) -> int:
		return len(self.times)


@dataclass(frozen=True, eq=False)
class BBISeries:
	"""
	Beat-to-beat intervals with per-interval quality flags.

	Attributes:
	    onset_times: Time in seconds of the beat starting each interval.
	    intervals_ms: Interval durations in milliseconds, all positive.
	    flags: Per-interval BBIFlag values; all VALID when omitted.
	    low_confidence: Per-interval flag for values filled in over a long gap.

	"""

	onset_times: np.ndarray
	intervals_ms: np.ndarray
	flags: Optional[np.ndarray] = None
	low_confidence: Optional[np.ndarray] = None

	def __post_init__(self):
		onsets = _frozen_array(self.onset_times)
		intervals = _frozen_array(self.intervals_ms)
		if len(onsets) != len(intervals):
			raise InvalidSeriesError(
				f'onset_times and intervals_ms differ in length ({len(onsets)} != {len(intervals)})'
			)
		validate_finite(intervals, 'intervals_ms')
		if np.any(intervals <= 0):
			raise InvalidSeriesError('all intervals_ms must be positive')
		n = len(onsets)
		flags = np.full(n, BBIFlag.VALID) if self.flags is None else self.flags
		low = np.zeros(n, dtype=bool) if self.low_confidence is None else self.low_confidence
		flags = _frozen_array(flags, dtype=np.int8)
		low = _frozen_array(low, dtype=bool)
		if len(flags) != n or len(low) != n:
			raise InvalidSeriesError('flags and low_confidence must match the series length')
		if np.any((flags < BBIFlag.VALID) | (flags > BBIFlag.INTERPOLATED)):
			raise InvalidSeriesError('unknown interval flag')
		object.__setattr__(self, 'onset_times', onsets)
		object.__setattr__(self, 'intervals_ms', intervals)
		object.__setattr__(self, 'flags', flags)
		object.__setattr__(self, 'low_confidence', low)

	def __len__(self) -> int:
		return len(self.intervals_ms)

	@property
	def end_times(self) -> np.ndarray:
		"""Time in seconds at which each interval ends."""
		return self.onset_times + self.intervals_ms / 1000.0

	@property
	def valid(self) -> np.ndarray:
		"""Boolean mask of VALID intervals."""
		return self.flags == BBIFlag.VALID

	@property
	def span_s(self) -> float:
		"""Seconds from the first onset to the end of the last interval."""
		if len(self) == 0:
			return 0.0
		return float(self.end_times[-1] - self.onset_times[0])

	def replace(self, **changes) -> 'BBISeries':
		"""Return a copy with the given fields changed."""
		fields = {
			'onset_times': self.onset_times,
			'intervals_ms': self.intervals_ms,
			'flags': self.flags,
			'low_confidence': self.low_confidence,
		}
		fields.update(changes)
		return BBISeries(**fields)

	def subset(self, index: Union[slice, np.ndarray]) -> 'BBISeries':
		"""Return the intervals selected by a slice, mask or index array."""
		return BBISeries(
			self.onset_times[index],
			self.intervals_ms[index],
			self.flags[index],
			self.low_confidence[index],
		)


@dataclass(frozen=True)
class FeatureRecord:
	"""
	One epoch of device features, as transmitted to the server.

	Attributes:
	    epoch_start: Epoch start time in seconds.
	    bbis: (onset offset from epoch start in ms, interval in ms) pairs.
	    motion_power: Mean squared high-passed acceleration per motion window, g².

	Values are held at wire precision (whole milliseconds, float32 powers), so
	a record compares equal to its decoded copy.

	"""

	epoch_start: float
	bbis: Tuple[Tuple[int, int], ...] = field(default_factory=tuple)
	motion_power: Tuple[float, ...] = field(default_factory=tuple)

	def __post_init__(self):
		pairs = tuple((int(offset), int(interval)) for offset, interval in self.bbis)
		for offset, interval in pairs:
			if not 0 <= offset <= MAX_OFFSET_MS:
				raise InvalidSeriesError(f'onset offset {offset} ms out of range')
			if not 1 <= interval <= MAX_INTERVAL_MS:
				raise InvalidSeriesError(f'interval {interval} ms out of range')
		powers = tuple(float(p) for p in np.asarray(self.motion_power, dtype=np.float32))
		object.__setattr__(self, 'epoch_start', float(self.epoch_start))
		object.__setattr__(self, 'bbis', pairs)
		object.__setattr__(self, 'motion_power', powers)


def _as_points(
	series: Union[TimedSeries, Tuple[Sequence[float], Sequence[float]], Iterable],
) -> Tuple[np.ndarray, np.ndarray]:
	if isinstance(series, TimedSeries):
		return np.asarray(series.times), np.asarray(series.values)
	if isinstance(series, tuple) and all(isinstance(s, np.ndarray) for s in series):
		times, values = series
		return np.asarray(times, dtype=float), np.asarray(values, dtype=float)
	points = np.asarray(list(series), dtype=float).reshape(-1, 2)
	return points[:, 0], points[:, 1]


def interpolate_at(series, query_times: Sequence[float]) -> np.ndarray:
	"""
	Evaluate the piecewise-linear function through ``series`` at given times.

	Args:
	    series: A TimedSeries, a (times, values) tuple of arrays or (time, value) pairs.
	    query_times: Times inside the series span.

	Returns:
	    np.ndarray: Interpolated values.

	Raises:
	    InsufficientDataError: Fewer than two points.
	    InvalidSeriesError: Times not strictly increasing or queries outside the span.

	"""
	times, values = _as_points(series)
	validate_min_length(times, 2, 'resampling input')
	validate_strictly_increasing(times)
	query = np.asarray(query_times, dtype=float)
	tolerance = 1e-9 * max(1.0, abs(times[0]), abs(times[-1]))
	if query.size and (query.min() < times[0] - tolerance or query.max() > times[-1] + tolerance):
		raise InvalidSeriesError(
			f'requested span [{query.min()}, {query.max()}] leaves input span [{times[0]}, {times[-1]}]'
		)
	return np.interp(query, times, values)


def resample_linear(
	series,
	fs: float,
	t_start: Optional[float] = None,
	t_end: Optional[float] = None,
) -> UniformSeries:
	"""
	Resample irregular (time, value) points onto a uniform grid.

	Output samples lie at ``t_start + k / fs`` for every ``k`` with the sample
	time not after ``t_end``; each value is the linear interpolation between
	the bracketing input points.

	Args:
	    series: A TimedSeries, a (times, values) tuple of arrays or (time, value) pairs.
	    fs: Output sampling frequency in Hz.
	    t_start: First output time; defaults to the first input time.
	    t_end: Last admissible output time; defaults to the last input time.

	Returns:
	    UniformSeries: The resampled series.

	Raises:
	    InsufficientDataError: Fewer than two points.
	    InvalidSeriesError: Non-monotonic times or a span outside the input.

	"""
	times, values = _as_points(series)
	validate_min_length(times, 2, 'resampling input')
	validate_strictly_increasing(times)
	t_start = times[0] if t_start is None else float(t_start)
	t_end = times[-1] if t_end is None else float(t_end)
	if t_end < t_start:
		raise InvalidSeriesError(f't_end {t_end} precedes t_start {t_start}')
	count = int(math.floor((t_end - t_start) * fs + 1e-9)) + 1
	grid = t_start + np.arange(count) / fs
	return UniformSeries(interpolate_at((times, values), grid), fs, t_start)
