"""
Beat detection on the PPG signal.

Beats are the maxima of the first-order derivative of the PPG (the steepest
point of each systolic upstroke). The derivative used for detection is a
Savitzky-Golay estimate over a short window, which keeps sensor noise from
producing maxima of its own. Candidates must clear an amplitude floor
relative to recent beats and respect the refractory period of the heart;
accepted maxima are refined to sub-sample resolution with a parabola through
the peak sample and its two neighbours.
"""

import logging
from collections import deque
from typing import List, Optional

import numpy as np
from scipy.signal import find_peaks, savgol_filter

from ppg_sleep.exceptions import BoundaryIndexError, InsufficientDataError, ValidationError
from ppg_sleep.signals.core import BBISeries, BeatSeries, UniformSeries
from ppg_sleep.signals.motion import MotionMask
from ppg_sleep.utils.validators import validate_min_length

logger = logging.getLogger(__name__)

DEFAULT_REFRACTORY_S = 0.3
DEFAULT_FLOOR_RATIO = 0.3
DEFAULT_FLOOR_HISTORY = 8
DEFAULT_FLOOR_RESET_S = 1.5
DEFAULT_SMOOTHING_S = 0.28
MIN_SIGNAL_S = 2.0

SAVGOL_ORDER = 2
SAVGOL_MIN_WINDOW = 5


def derivative(ppg: UniformSeries) -> UniformSeries:
	"""
	Forward-difference derivative in units per second.

	``out[k] = (ppg[k+1] - ppg[k]) * fs``; each value is the slope at the
	midpoint of its sample pair, so the time base moves by half a sample.

	Raises:
	    InsufficientDataError: If the series has fewer than two samples.

	"""
	validate_min_length(ppg.values, 2, 'PPG')
	return UniformSeries(np.diff(ppg.values) * ppg.fs, ppg.fs, ppg.t0 + 0.5 / ppg.fs)


def smoothed_derivative(ppg: UniformSeries, smoothing_s: float = DEFAULT_SMOOTHING_S) -> UniformSeries:
	"""
	Savitzky-Golay derivative in units per second, on the PPG's own time base.

	A quadratic is fitted over the odd number of samples closest to
	``smoothing_s`` (at least five) and its slope taken at the centre sample.
	A zero window returns the forward difference of ``derivative``.

	Raises:
	    ValidationError: If ``smoothing_s`` is negative.
	    InsufficientDataError: If the series is shorter than the window.

	"""
	if smoothing_s < 0:
		raise ValidationError(f'smoothing window must not be negative, got {smoothing_s}')
	if smoothing_s == 0:
		return derivative(ppg)
	window = max(SAVGOL_MIN_WINDOW, int(round(smoothing_s * ppg.fs)) // 2 * 2 + 1)
	validate_min_length(ppg.values, window, 'PPG')
	values = savgol_filter(ppg.values, window, SAVGOL_ORDER, deriv=1, delta=1.0 / ppg.fs)
	return ppg.with_values(values)


def detect_maxima(
	deriv: UniformSeries,
	refractory_s: float = DEFAULT_REFRACTORY_S,
	floor_ratio: float = DEFAULT_FLOOR_RATIO,
	floor_history: int = DEFAULT_FLOOR_HISTORY,
	reset_s: float = DEFAULT_FLOOR_RESET_S,
	exclude: Optional[np.ndarray] = None,
) -> np.ndarray:
	"""
	Find upstroke maxima of a PPG derivative.

	Candidates are the positive local maxima reported by
	``scipy.signal.find_peaks`` (a plateau yields its middle sample). Once
	``floor_history`` beats are accepted, a candidate must also exceed
	``floor_ratio`` times the median amplitude of the last ``floor_history``
	accepted maxima. Candidates closer than ``refractory_s`` to the previous
	accepted maximum compete with it: the larger amplitude stays, the earlier
	one on ties.

	Maxima on samples marked in ``exclude`` are accepted but never enter the
	floor history. When a candidate comes more than ``reset_s`` after the
	last accepted maximum the history is cleared and the floor warms up again.

	Args:
	    deriv: Derivative series.
	    refractory_s: Minimum spacing of accepted maxima in seconds.
	    floor_ratio: Relative amplitude floor.
	    floor_history: Number of recent amplitudes in the floor median.
	    reset_s: Longest gap between accepted maxima before the floor restarts.
	    exclude: Per-sample mask of samples kept out of the floor history.

	Returns:
	    np.ndarray: Accepted sample indices in increasing order.

	Raises:
	    ValidationError: If the refractory period is not positive, the reset
	        gap does not exceed it, or ``exclude`` does not match the series.

	"""
	if refractory_s <= 0:
		raise ValidationError(f'refractory period must be positive, got {refractory_s}')
	if reset_s <= refractory_s:
		raise ValidationError(
			f'floor reset of {reset_s} s must exceed the refractory period of {refractory_s} s'
		)
	d = deriv.values
	if exclude is None:
		exclude = np.zeros(len(d), dtype=bool)
	exclude = np.asarray(exclude, dtype=bool)
	if exclude.shape != d.shape:
		raise ValidationError(f'exclude mask has {exclude.size} entries for {d.size} samples')
	if len(d) < 3:
		return np.array([], dtype=np.int64)

	candidates, _ = find_peaks(d)
	candidates = candidates[d[candidates] > 0]
	min_gap = refractory_s * deriv.fs - 1e-9
	reset_gap = reset_s * deriv.fs

	accepted: List[int] = []
	amplitudes = deque(maxlen=floor_history)
	floor = None
	tracked = False
	for k in candidates:
		amplitude = d[k]
		if accepted and k - accepted[-1] > reset_gap and amplitudes:
			logger.debug(
				f'No beat for {(k - accepted[-1]) / deriv.fs:.2f} s before '
				f'{deriv.t0 + k / deriv.fs:.2f} s, restarting the amplitude floor'
			)
			amplitudes.clear()
			floor = None
		if floor is not None and amplitude <= floor:
			continue
		if accepted and k - accepted[-1] < min_gap:
			if amplitude <= d[accepted[-1]]:
				continue
			if tracked:
				amplitudes.pop()
			accepted[-1] = int(k)
		else:
			accepted.append(int(k))
		tracked = not exclude[k]
		if tracked:
			amplitudes.append(amplitude)
		if len(amplitudes) == floor_history:
			floor = floor_ratio * np.median(amplitudes)
		else:
			floor = None
	return np.asarray(accepted, dtype=np.int64)


def parabolic_offset(y_prev: float, y_peak: float, y_next: float) -> float:
	"""
	Vertex offset, in samples, of the parabola through three equispaced points.

	Returns 0 for a flat triple; the offset is clamped to [-0.5, 0.5].
	"""
	denominator = y_prev - 2.0 * y_peak + y_next
	if denominator == 0:
		return 0.0
	delta = (y_prev - y_next) / (2.0 * denominator)
	return float(min(0.5, max(-0.5, delta)))


def refine_peak_parabolic(series: UniformSeries, k: int) -> float:
	"""
	Sub-sample time of the local maximum at index ``k``.

	Args:
	    series: The sampled signal.
	    k: Index of a local maximum with a neighbour on each side.

	Returns:
	    float: ``t0 + (k + delta) / fs`` where delta is the parabolic vertex offset.

	Raises:
	    BoundaryIndexError: If ``k`` is the first or last sample.

	"""
	if not 1 <= k <= len(series) - 2:
		raise BoundaryIndexError(f'index {k} has no neighbour on both sides')
	y = series.values
	delta = parabolic_offset(y[k - 1], y[k], y[k + 1])
	return series.t0 + (k + delta) / series.fs


def _enforce_refractory(
	times: np.ndarray, amplitudes: np.ndarray, refractory_s: float
) -> np.ndarray:
	keep: List[int] = []
	for i in range(len(times)):
		if keep and times[i] - times[keep[-1]] < refractory_s:
			if amplitudes[i] > amplitudes[keep[-1]]:
				keep[-1] = i
			continue
		keep.append(i)
	return np.asarray(keep, dtype=np.int64)


def detect_beats(
	ppg: UniformSeries,
	mask: Optional[MotionMask] = None,
	refractory_s: float = DEFAULT_REFRACTORY_S,
	floor_ratio: float = DEFAULT_FLOOR_RATIO,
	floor_history: int = DEFAULT_FLOOR_HISTORY,
	smoothing_s: float = DEFAULT_SMOOTHING_S,
	reset_s: float = DEFAULT_FLOOR_RESET_S,
) -> BeatSeries:
	"""
	Detect beats in a single PPG channel.

	Beats inside corrupted motion segments are still returned, since gating
	happens when the intervals are flagged, but their amplitudes stay out of
	the floor that later beats are measured against.

	Args:
	    ppg: PPG channel.
	    mask: Motion mask; maxima in its corrupted segments do not move the floor.
	    refractory_s: Minimum spacing of beats in seconds.
	    floor_ratio: Relative amplitude floor.
	    floor_history: Number of recent amplitudes in the floor median.
	    smoothing_s: Savitzky-Golay window of the detection derivative.
	    reset_s: Gap without beats after which the floor restarts.

	Returns:
	    BeatSeries: Refined, strictly increasing beat times.

	Raises:
	    InsufficientDataError: If the signal is shorter than two seconds.

	"""
	if ppg.duration < MIN_SIGNAL_S:
		raise InsufficientDataError(
			f'beat detection needs {MIN_SIGNAL_S} s of PPG, got {ppg.duration:.2f} s'
		)
	deriv = smoothed_derivative(ppg, smoothing_s)
	exclude = None
	if mask is not None and mask.windows:
		exclude = mask.overlaps(deriv.times, deriv.times)
	peaks = detect_maxima(deriv, refractory_s, floor_ratio, floor_history, reset_s, exclude)
	peaks = peaks[(peaks >= 1) & (peaks <= len(deriv) - 2)]

	d = deriv.values
	deltas = np.array(
		[parabolic_offset(d[k - 1], d[k], d[k + 1]) for k in peaks], dtype=float
	)
	times = deriv.t0 + (peaks + deltas) / deriv.fs if len(peaks) else np.array([])

	keep = _enforce_refractory(times, d[peaks], refractory_s)
	if len(keep) != len(times):
		logger.warning(
			f'Refined beat times violated the refractory period, dropped {len(times) - len(keep)} beats'
		)
	times = times[keep]

	if exclude is not None and len(times):
		inside = mask.overlaps(times, times)
		logger.info(f'Detected {len(times)} beats, {int(inside.sum())} during motion')
	else:
		logger.info(f'Detected {len(times)} beats')
	return BeatSeries(times)


def beats_to_intervals(beats: BeatSeries) -> BBISeries:
	"""
	Intervals between consecutive beats.

	Args:
	    beats: At least two beat times.

	Returns:
	    BBISeries: Interval ``k`` spans beats ``k`` and ``k + 1``, in ms, all VALID.

	Raises:
	    InsufficientDataError: If fewer than two beats are given.

	"""
	validate_min_length(beats.times, 2, 'beat series')
	return BBISeries(beats.times[:-1], np.diff(beats.times) * 1000.0)
