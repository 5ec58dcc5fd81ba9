"""
Motion indicator from 3-axis acceleration.

The norm of the acceleration is high-passed by subtracting a centred moving
average (removing the constant gravity component), its power is estimated
over non-overlapping windows, and windows above a threshold are marked as
corrupted for downstream gating of the optical measurements.
"""

import logging
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np
from scipy.ndimage import uniform_filter1d

from ppg_sleep.exceptions import InsufficientDataError, InvalidSeriesError, ValidationError
from ppg_sleep.signals.core import UniformSeries

logger = logging.getLogger(__name__)

DEFAULT_WINDOW_S = 1.0
DEFAULT_GRAVITY_WINDOW_S = 2.0
DEFAULT_THRESHOLD_G2 = 0.01


@dataclass(frozen=True)
class MotionWindow:
	"""One power-estimation window."""

	start: float
	end: float
	power: float
	corrupted: bool


@dataclass(frozen=True)
class MotionMask:
	"""
	Contiguous motion windows with their corruption flags.

	Attributes:
	    windows: Windows in time order, each ending where the next starts.
	    threshold_g2: Power above which a window counts as corrupted.

	"""

	windows: Tuple[MotionWindow, ...] = ()
	threshold_g2: float = DEFAULT_THRESHOLD_G2

	@property
	def segments(self) -> List[Tuple[float, float]]:
		"""Corrupted time spans, adjacent corrupted windows merged."""
		merged: List[Tuple[float, float]] = []
		for window in self.windows:
			if not window.corrupted:
				continue
			if merged and abs(merged[-1][1] - window.start) < 1e-9:
				merged[-1] = (merged[-1][0], window.end)
			else:
				merged.append((window.start, window.end))
		return merged

	@property
	def corrupted_fraction(self) -> float:
		"""Share of windows flagged as corrupted."""
		if not self.windows:
			return 0.0
		return sum(w.corrupted for w in self.windows) / len(self.windows)

	def overlaps(self, starts: np.ndarray, ends: np.ndarray) -> np.ndarray:
		"""
		Test spans against the corrupted segments.

		Args:
		    starts: Span start times in seconds.
		    ends: Span end times in seconds.

		Returns:
		    np.ndarray: True where a span intersects a corrupted segment.

		"""
		starts = np.asarray(starts, dtype=float)
		ends = np.asarray(ends, dtype=float)
		hit = np.zeros(starts.shape, dtype=bool)
		segments = self.segments
		if not segments:
			return hit
		seg_starts = np.array([s for s, _ in segments])
		seg_ends = np.array([e for _, e in segments])
		# First segment ending after each span start; segments are sorted and disjoint.
		index = np.searchsorted(seg_ends, starts, side='right')
		inside = index < len(segments)
		hit[inside] = seg_starts[index[inside]] < ends[inside]
		return hit


def accel_norm(x: UniformSeries, y: UniformSeries, z: UniformSeries) -> UniformSeries:
	"""
	Pointwise Euclidean norm of three acceleration axes.

	Args:
	    x: Acceleration along x in g.
	    y: Acceleration along y in g.
	    z: Acceleration along z in g.

	Returns:
	    UniformSeries: The norm in g on the common time base.

	Raises:
	    InvalidSeriesError: If the axes differ in length or sampling frequency.

	"""
	if not len(x) == len(y) == len(z):
		raise InvalidSeriesError(
			f'acceleration axes differ in length ({len(x)}, {len(y)}, {len(z)})'
		)
	if not x.fs == y.fs == z.fs:
		raise InvalidSeriesError(
			f'acceleration axes differ in sampling frequency ({x.fs}, {y.fs}, {z.fs})'
		)
	return x.with_values(np.sqrt(x.values**2 + y.values**2 + z.values**2))


def remove_gravity(
	norm: UniformSeries, window_s: float = DEFAULT_GRAVITY_WINDOW_S
) -> UniformSeries:
	"""
	High-pass the acceleration norm by subtracting its centred moving average.

	The averaging window spans ``window_s`` seconds rounded to an odd number of
	samples; edges are extended with the nearest sample.

	Args:
	    norm: Acceleration norm in g.
	    window_s: Moving-average length in seconds.

	Returns:
	    UniformSeries: Norm minus its moving average, in g.

	Raises:
	    InsufficientDataError: If the series is shorter than the window.

	"""
	size = 2 * int(round(window_s * norm.fs / 2)) + 1
	if len(norm) < size:
		raise InsufficientDataError(
			f'gravity removal needs at least {size} samples, got {len(norm)}'
		)
	baseline = uniform_filter1d(norm.values, size=size, mode='nearest')
	return norm.with_values(norm.values - baseline)


def motion_power(hp: UniformSeries, window_s: float = DEFAULT_WINDOW_S) -> UniformSeries:
	"""
	Mean squared sample value over non-overlapping windows.

	A trailing partial window is dropped.

	Args:
	    hp: High-passed acceleration norm in g.
	    window_s: Window length in seconds.

	Returns:
	    UniformSeries: One power value (g²) per window, ``fs = 1 / window_s`` and
	    ``t0`` the start of the first window.

	Raises:
	    ValidationError: If a window holds less than one sample.
	    InsufficientDataError: If the series is empty or shorter than a window.

	"""
	size = int(round(window_s * hp.fs))
	if size < 1:
		raise ValidationError(f'window of {window_s} s holds no sample at {hp.fs} Hz')
	if len(hp) == 0:
		raise InsufficientDataError('motion power of an empty series')
	count = len(hp) // size
	if count == 0:
		raise InsufficientDataError(
			f'series of {len(hp)} samples is shorter than one {size}-sample window'
		)
	blocks = hp.values[: count * size].reshape(count, size)
	return UniformSeries(np.mean(blocks**2, axis=1), hp.fs / size, hp.t0)


def motion_mask(
	powers: UniformSeries, threshold_g2: float = DEFAULT_THRESHOLD_G2
) -> MotionMask:
	"""
	Flag windows whose power exceeds a threshold.

	Args:
	    powers: Per-window powers as returned by motion_power.
	    threshold_g2: Corruption threshold in g².

	Returns:
	    MotionMask: Windows with ``corrupted = power > threshold``.

	Raises:
	    ValidationError: If the threshold is negative.

	"""
	if threshold_g2 < 0:
		raise ValidationError(f'threshold must be non-negative, got {threshold_g2}')
	width = 1.0 / powers.fs
	starts = powers.times
	windows = tuple(
		MotionWindow(float(start), float(start + width), float(power), bool(power > threshold_g2))
		for start, power in zip(starts, powers.values)
	)
	mask = MotionMask(windows, threshold_g2)
	logger.debug(
		f'Motion mask: {len(mask.segments)} corrupted segments, '
		f'{mask.corrupted_fraction:.1%} of windows'
	)
	return mask
