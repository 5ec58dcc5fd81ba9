"""
Scoring of pipeline outputs against reference recordings.

Beat intervals are compared after dynamic time warping; heart rate is
computed on both aligned interval sequences; breathing rate is interpolated
at the reference sample times.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ppg_sleep.evaluation.alignment import Alignment, dtw_align
from ppg_sleep.evaluation.metrics import mae, mape
from ppg_sleep.exceptions import InsufficientDataError, InvalidInputError
from ppg_sleep.signals.cardio import heart_rate
from ppg_sleep.signals.core import BBISeries, TimedSeries, interpolate_at

logger = logging.getLogger(__name__)

Segment = Tuple[float, float]


@dataclass(frozen=True)
class Score:
	"""MAE and MAPE over the compared pairs."""

	mae: float
	mape_pct: float
	pairs: int


def _merge(segments: List[Segment]) -> List[Segment]:
	merged: List[Segment] = []
	for start, end in sorted(segments):
		if merged and start <= merged[-1][1]:
			merged[-1] = (merged[-1][0], max(merged[-1][1], end))
		else:
			merged.append((start, end))
	return merged


def reference_exclusions(
	ref_bbi: BBISeries,
	max_gap_s: float = 2.0,
	min_ms: float = 300.0,
	max_ms: float = 1500.0,
) -> List[Segment]:
	"""
	Segments where the reference is considered corrupted.

	A reference interval longer than ``max_gap_s`` (a missed ECG beat) or
	outside ``[min_ms, max_ms]`` excludes the time it spans.

	Returns:
	    List[Segment]: Sorted, merged ``(start, end)`` segments in seconds.

	"""
	intervals = ref_bbi.intervals_ms
	bad = (intervals > max_gap_s * 1000.0) | (intervals < min_ms) | (intervals > max_ms)
	segments = _merge(
		list(zip(ref_bbi.onset_times[bad].tolist(), ref_bbi.end_times[bad].tolist()))
	)
	if segments:
		excluded = sum(end - start for start, end in segments)
		fraction = excluded / max(ref_bbi.span_s, 1e-9)
		logger.info(f'{len(segments)} reference exclusion segments cover {excluded:.1f} s')
		if fraction > 0.5:
			logger.warning(f'Reference exclusions cover {fraction:.0%} of the recording')
	return segments


def _check_segments(exclusions: Sequence[Segment]) -> np.ndarray:
	segments = np.asarray(exclusions, dtype=np.float64).reshape(-1, 2)
	if np.any(segments[:, 1] < segments[:, 0]):
		raise InvalidInputError('exclusion segments must end after they start')
	if len(segments) > 1 and np.any(segments[1:, 0] < segments[:-1, 1]):
		raise InvalidInputError('exclusion segments must be sorted and non-overlapping')
	return segments


def in_segments(times: np.ndarray, exclusions: Sequence[Segment]) -> np.ndarray:
	"""Mask of ``times`` falling inside any half-open ``[start, end)`` segment."""
	segments = _check_segments(exclusions)
	times = np.asarray(times, dtype=np.float64)
	if len(segments) == 0:
		return np.zeros(len(times), dtype=bool)
	idx = np.searchsorted(segments[:, 0], times, side='right') - 1
	inside = idx >= 0
	inside[inside] = times[inside] < segments[idx[inside], 1]
	return inside


@dataclass(frozen=True)
class RRScore(Score):
	"""
	Interval score together with the data it was computed on.

	Attributes:
	    test: Test intervals trimmed to the common time span.
	    ref: Reference intervals trimmed to the common time span.
	    alignment: Warping path between ``test`` and ``ref``.
	    kept: Mask over the path of the pairs that entered the score.

	"""

	test: Optional[BBISeries] = None
	ref: Optional[BBISeries] = None
	alignment: Optional[Alignment] = None
	kept: Optional[np.ndarray] = None


def common_span(test_bbi: BBISeries, ref_bbi: BBISeries) -> Tuple[BBISeries, BBISeries]:
	"""
	Trim both series to the intervals whose onset lies in their common span.

	Raises:
	    InsufficientDataError: If the spans do not overlap.

	"""
	if len(test_bbi) == 0 or len(ref_bbi) == 0:
		raise InsufficientDataError('cannot score an empty interval series')
	start = max(test_bbi.onset_times[0], ref_bbi.onset_times[0])
	end = min(test_bbi.end_times[-1], ref_bbi.end_times[-1])
	trimmed = []
	for series in (test_bbi, ref_bbi):
		inside = (series.onset_times >= start) & (series.onset_times < end)
		if not inside.any():
			raise InsufficientDataError('test and reference intervals do not overlap in time')
		trimmed.append(series.subset(inside))
	return trimmed[0], trimmed[1]


def evaluate_rr(
	test_bbi: BBISeries,
	ref_bbi: BBISeries,
	exclusions: Sequence[Segment] = (),
	band_width: Optional[int] = None,
	drop_low_confidence: bool = True,
) -> RRScore:
	"""
	Score detected intervals against reference intervals.

	Both series are trimmed to their common time span and the interval values
	aligned with dtw_align. Pairs whose reference onset falls inside an
	exclusion segment, or whose test interval is low confidence, are dropped
	before computing the errors.

	Args:
	    test_bbi: Corrected intervals from the pipeline.
	    ref_bbi: Reference intervals.
	    exclusions: Sorted, non-overlapping ``(start, end)`` segments.
	    band_width: DTW band half-width; see dtw_align.
	    drop_low_confidence: Whether to skip low-confidence test intervals.

	Returns:
	    RRScore: MAE in ms and MAPE in percent over the surviving pairs.

	Raises:
	    InsufficientDataError: If the series do not overlap or no pair survives.
	    InvalidInputError: If the exclusions are unsorted or overlap.

	"""
	test, ref = common_span(test_bbi, ref_bbi)
	alignment = dtw_align(test.intervals_ms, ref.intervals_ms, band_width)
	ti, ri = alignment.test_index, alignment.ref_index
	keep = ~in_segments(ref.onset_times[ri], exclusions)
	if drop_low_confidence:
		keep &= ~test.low_confidence[ti]
	if not keep.any():
		raise InsufficientDataError('no aligned interval pair outside the excluded segments')
	a = test.intervals_ms[ti[keep]]
	b = ref.intervals_ms[ri[keep]]
	logger.debug(f'RR scored on {int(keep.sum())} of {len(alignment)} aligned pairs')
	return RRScore(mae(a, b), mape(a, b), int(keep.sum()), test, ref, alignment, keep)


def aligned_series(bbi: BBISeries, index: np.ndarray, onsets: np.ndarray) -> BBISeries:
	"""Intervals picked along one side of an alignment, stamped at ``onsets``."""
	return BBISeries(onsets, bbi.intervals_ms[index], bbi.flags[index], bbi.low_confidence[index])


def hr_reference(aligned_ref_bbi: BBISeries, n: int = 10) -> TimedSeries:
	"""Ten-beat heart rate of aligned reference intervals; see cardio.heart_rate."""
	return heart_rate(aligned_ref_bbi, n)


def evaluate_hr(rr: RRScore, n: int = 10) -> Score:
	"""
	Score heart rate over the aligned interval pairs of an RR evaluation.

	Both sides of the kept pairs are turned into heart rate windows of ``n``
	pairs, stamped at the reference onsets, and compared window by window.

	Raises:
	    InsufficientDataError: If fewer than ``n`` pairs were kept.

	"""
	ti = rr.alignment.test_index[rr.kept]
	ri = rr.alignment.ref_index[rr.kept]
	onsets = rr.ref.onset_times[ri]
	ref_hr = hr_reference(aligned_series(rr.ref, ri, onsets), n)
	test_hr = heart_rate(aligned_series(rr.test, ti, onsets), n)
	return Score(mae(test_hr.values, ref_hr.values), mape(test_hr.values, ref_hr.values), len(ref_hr))


def evaluate_br(
	est: TimedSeries,
	ref: TimedSeries,
	drop_low_confidence: bool = True,
) -> Score:
	"""
	Score breathing rate estimates against a reference trace.

	The reference is trimmed to the time span of the estimate and the
	estimate is linearly interpolated at the remaining reference times.

	Args:
	    est: Estimated breathing rate per minute.
	    ref: Reference breathing rate per minute.
	    drop_low_confidence: Whether to skip reference times next to
	        low-confidence estimates.

	Returns:
	    Score: MAE in breaths per minute and MAPE in percent.

	Raises:
	    InsufficientDataError: If the two traces do not overlap.

	"""
	if len(est) == 0 or len(ref) == 0:
		raise InsufficientDataError('breathing rate traces must not be empty')
	inside = (ref.times >= est.times[0]) & (ref.times <= est.times[-1])
	if drop_low_confidence and est.low_confidence.any():
		near_low = np.interp(ref.times, est.times, est.low_confidence.astype(float)) > 0
		inside &= ~near_low
	if not inside.any():
		raise InsufficientDataError('estimate and reference breathing rate do not overlap')
	estimate = interpolate_at(est, ref.times[inside])
	reference = ref.values[inside]
	return Score(mae(estimate, reference), mape(estimate, reference), int(inside.sum()))
