"""
Interval correction and heart rate.

Intervals corrupted by movement or outside physiological limits are flagged,
then replaced by linear interpolation between the surrounding valid
intervals. Heart rate is the mean inverse of ten consecutive corrected
intervals.
"""

import logging
from collections import deque
from typing import Optional

import numpy as np

from ppg_sleep.exceptions import InsufficientDataError
from ppg_sleep.signals.core import BBIFlag, BBISeries, TimedSeries
from ppg_sleep.signals.motion import MotionMask
from ppg_sleep.utils.validators import validate_min_length

logger = logging.getLogger(__name__)

DEFAULT_MIN_MS = 300.0
DEFAULT_MAX_MS = 1500.0
DEFAULT_JUMP_RATIO = 0.3
DEFAULT_MEDIAN_HISTORY = 9
DEFAULT_MAX_REJECTS = 9
DEFAULT_HR_BEATS = 10
DEFAULT_LOW_CONFIDENCE_GAP_S = 10.0

# The jump rule needs a few accepted intervals before its median means anything.
MIN_JUMP_HISTORY = 3


def flag_intervals(
	bbi: BBISeries,
	mask: Optional[MotionMask] = None,
	min_ms: float = DEFAULT_MIN_MS,
	max_ms: float = DEFAULT_MAX_MS,
	jump_ratio: float = DEFAULT_JUMP_RATIO,
	median_history: int = DEFAULT_MEDIAN_HISTORY,
	max_consecutive_rejects: int = DEFAULT_MAX_REJECTS,
) -> BBISeries:
	"""
	Classify each interval as valid, motion-corrupted or implausible.

	An interval is MOTION when its span overlaps a corrupted segment of the
	mask. Otherwise it is IMPLAUSIBLE when it lies outside ``[min_ms, max_ms]``
	or deviates from the median of the last ``median_history`` valid
	intervals by more than ``jump_ratio`` of that median. After
	``max_consecutive_rejects`` jump rejections in a row the median history is
	discarded and rebuilt from the following intervals.

	Args:
	    bbi: Intervals to classify; existing flags are ignored.
	    mask: Motion mask; no motion gating when omitted.
	    min_ms: Shortest plausible interval.
	    max_ms: Longest plausible interval.
	    jump_ratio: Largest plausible relative deviation from the running median.
	    median_history: Number of valid intervals in the running median.
	    max_consecutive_rejects: Jump rejections tolerated before the history resets.

	Returns:
	    BBISeries: The same intervals with fresh flags.

	"""
	flags = np.full(len(bbi), BBIFlag.VALID, dtype=np.int8)
	if mask is not None:
		flags[mask.overlaps(bbi.onset_times, bbi.end_times)] = BBIFlag.MOTION

	history = deque(maxlen=median_history)
	rejects = 0
	for k, interval in enumerate(bbi.intervals_ms):
		if flags[k] == BBIFlag.MOTION:
			continue
		if not min_ms <= interval <= max_ms:
			flags[k] = BBIFlag.IMPLAUSIBLE
			continue
		if len(history) >= MIN_JUMP_HISTORY:
			median = np.median(history)
			if abs(interval - median) > jump_ratio * median:
				flags[k] = BBIFlag.IMPLAUSIBLE
				rejects += 1
				if rejects >= max_consecutive_rejects:
					logger.debug(f'Resetting interval history at onset {bbi.onset_times[k]:.2f} s')
					history.clear()
					rejects = 0
				continue
		rejects = 0
		history.append(interval)

	counts = {flag.name.lower(): int(np.sum(flags == flag)) for flag in BBIFlag}
	logger.info(f'Flagged {len(bbi)} intervals: {counts}')
	return bbi.replace(flags=flags, low_confidence=np.zeros(len(bbi), dtype=bool))


def correct_intervals(
	flagged: BBISeries, low_confidence_gap_s: float = DEFAULT_LOW_CONFIDENCE_GAP_S
) -> BBISeries:
	"""
	Replace non-valid intervals by linear interpolation.

	Each non-valid interval value becomes the linear interpolation, at its
	onset time, between the nearest valid intervals before and after it.
	Leading and trailing non-valid intervals are trimmed. Replaced entries
	are flagged INTERPOLATED; valid entries are left untouched. When the
	valid intervals bracketing a run of replaced entries are more than
	``low_confidence_gap_s`` apart, the replaced entries are marked low
	confidence.

	Args:
	    flagged: Flagged intervals.
	    low_confidence_gap_s: Longest gap still filled with full confidence.

	Returns:
	    BBISeries: Corrected intervals.

	Raises:
	    InsufficientDataError: If fewer than two intervals are valid.

	"""
	valid_index = np.flatnonzero(flagged.valid)
	if len(valid_index) < 2:
		raise InsufficientDataError(
			f'correction needs at least 2 valid intervals, got {len(valid_index)}'
		)
	series = flagged.subset(slice(valid_index[0], valid_index[-1] + 1))
	valid = series.valid
	onsets = series.onset_times
	anchors_t = onsets[valid]

	intervals = np.array(series.intervals_ms)
	replaced = ~valid
	intervals[replaced] = np.interp(onsets[replaced], anchors_t, series.intervals_ms[valid])

	flags = np.where(valid, BBIFlag.VALID, BBIFlag.INTERPOLATED).astype(np.int8)

	# Distance between the valid onsets bracketing each replaced entry.
	after = np.searchsorted(anchors_t, onsets, side='right')
	before = np.clip(after - 1, 0, len(anchors_t) - 1)
	after = np.clip(after, 0, len(anchors_t) - 1)
	gap = anchors_t[after] - anchors_t[before]
	low = replaced & (gap > low_confidence_gap_s)

	if replaced.any():
		logger.info(
			f'Interpolated {int(replaced.sum())} of {len(series)} intervals, '
			f'{int(low.sum())} low confidence'
		)
	return BBISeries(onsets, intervals, flags, low)


def heart_rate(corrected: BBISeries, n: int = DEFAULT_HR_BEATS) -> TimedSeries:
	"""
	Heart rate from the mean inverse of ``n`` consecutive intervals.

	Windows of ``n`` intervals do not overlap; a trailing partial window is
	dropped. Each value ``(60000 / n) * sum(1 / interval_ms)`` is stamped at
	the window centre.

	Args:
	    corrected: Corrected intervals.
	    n: Intervals per window.

	Returns:
	    TimedSeries: Heart rate in beats per minute, low confidence where any
	    interval of the window is.

	Raises:
	    InsufficientDataError: If fewer than ``n`` intervals are given.

	"""
	validate_min_length(corrected.intervals_ms, n, 'heart rate input')
	count = len(corrected) // n
	stop = count * n
	intervals = corrected.intervals_ms[:stop].reshape(count, n)
	rates = (60000.0 / n) * np.sum(1.0 / intervals, axis=1)
	starts = corrected.onset_times[:stop:n]
	ends = corrected.end_times[n - 1 : stop : n]
	low = corrected.low_confidence[:stop].reshape(count, n).any(axis=1)
	return TimedSeries((starts + ends) / 2.0, rates, low)
