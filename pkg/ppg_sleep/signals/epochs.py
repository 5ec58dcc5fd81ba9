"""
Grouping of device features into fixed-length epochs and back.

The device quantizes beat onsets and intervals to whole milliseconds and
motion powers to float32 when it packs them; the server unpacks the epochs
into one interval series and one motion-power series.
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from ppg_sleep.exceptions import InsufficientDataError, ValidationError
from ppg_sleep.signals.core import MAX_INTERVAL_MS, BBISeries, FeatureRecord, UniformSeries

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class UnpackedFeatures:
	"""Server-side view of a feature stream."""

	bbi: BBISeries
	powers: UniformSeries


def _beat_times_ms(bbi: BBISeries, t0: float) -> Tuple[np.ndarray, np.ndarray]:
	"""Onsets and ends in whole ms from ``t0``; a shared beat gets one value."""
	onset_ms = np.round((bbi.onset_times - t0) * 1000.0).astype(np.int64)
	end_ms = np.round((bbi.end_times - t0) * 1000.0).astype(np.int64)
	contiguous = np.abs(bbi.end_times[:-1] - bbi.onset_times[1:]) < 1e-6
	end_ms[:-1][contiguous] = onset_ms[1:][contiguous]
	return onset_ms, np.maximum(end_ms, onset_ms + 1)


def _split_gaps(onset_ms: np.ndarray, end_ms: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
	"""Tile spans longer than the wire limit with equal pieces that fit it."""
	pieces = -(-(end_ms - onset_ms) // MAX_INTERVAL_MS)
	if np.all(pieces == 1):
		return onset_ms, end_ms
	starts, ends = [], []
	for start, end, n in zip(onset_ms, end_ms, pieces):
		bounds = start + np.round(np.linspace(0, end - start, n + 1)).astype(np.int64)
		starts.append(bounds[:-1])
		ends.append(bounds[1:])
	logger.warning(
		f'Split {int((pieces > 1).sum())} gaps longer than {MAX_INTERVAL_MS} ms '
		f'into {int(pieces[pieces > 1].sum())} intervals'
	)
	return np.concatenate(starts), np.concatenate(ends)


def pack_epochs(
	bbi: BBISeries,
	powers: UniformSeries,
	epoch_s: float = 60.0,
) -> List[FeatureRecord]:
	"""
	Split intervals and motion powers into epoch records.

	Epochs start at the first motion window and hold ``epoch_s`` seconds each;
	the number of epochs covers both the motion windows and the last interval
	onset. An interval belongs to the epoch containing its onset.

	Beat times are rounded to whole milliseconds before anything else, and
	both the onset offsets and the intervals are differences of those rounded
	times, so unpacked intervals tile their onsets exactly. A span longer
	than the 16-bit interval field is sent as equal pieces, each far outside
	the plausible range, so the server interpolates across it.

	Args:
	    bbi: Intervals from beats_to_intervals.
	    powers: Per-window motion powers from motion_power.
	    epoch_s: Epoch length; a whole multiple of the motion window and of 1 ms.

	Returns:
	    List[FeatureRecord]: Records in epoch order, empty epochs included.

	Raises:
	    ValidationError: If the epoch is not a whole number of motion windows.

	"""
	per_epoch = epoch_s * powers.fs
	if per_epoch < 1 or abs(per_epoch - round(per_epoch)) > 1e-9:
		raise ValidationError(
			f'epoch of {epoch_s} s is not a whole number of {1 / powers.fs} s motion windows'
		)
	if abs(epoch_s * 1000.0 - round(epoch_s * 1000.0)) > 1e-6:
		raise ValidationError(f'epoch of {epoch_s} s is not a whole number of milliseconds')
	per_epoch = int(round(per_epoch))
	epoch_ms = int(round(epoch_s * 1000.0))
	t0 = powers.t0

	onset_ms, end_ms = _beat_times_ms(bbi, t0)
	keep = onset_ms >= 0
	onset_ms, end_ms = _split_gaps(onset_ms[keep], end_ms[keep])

	last = int(onset_ms[-1]) if len(onset_ms) else 0
	count = max(math.ceil(len(powers) / per_epoch), last // epoch_ms + 1)
	bounds = np.searchsorted(onset_ms // epoch_ms, np.arange(count + 1), side='left')

	records = []
	for k in range(count):
		lo, hi = bounds[k], bounds[k + 1]
		offsets = onset_ms[lo:hi] - k * epoch_ms
		intervals = end_ms[lo:hi] - onset_ms[lo:hi]
		records.append(
			FeatureRecord(
				t0 + k * epoch_s,
				tuple(zip(offsets.tolist(), intervals.tolist())),
				tuple(powers.values[k * per_epoch : (k + 1) * per_epoch].tolist()),
			)
		)
	logger.info(f'Packed {len(onset_ms)} intervals and {len(powers)} motion windows into {count} epochs')
	return records


def unpack_epochs(records: Sequence[FeatureRecord], motion_window_s: float = 1.0) -> UnpackedFeatures:
	"""
	Rebuild intervals and motion powers from epoch records.

	Onsets are ``epoch_start + offset_ms / 1000``; motion windows are assumed
	contiguous from the first epoch start.

	Raises:
	    InsufficientDataError: If the records hold fewer than two intervals.

	"""
	onsets, intervals, powers = [], [], []
	for record in records:
		for offset, interval in record.bbis:
			onsets.append(record.epoch_start + offset / 1000.0)
			intervals.append(float(interval))
		powers.extend(record.motion_power)
	if len(intervals) < 2:
		raise InsufficientDataError(f'feature stream holds {len(intervals)} intervals')
	t0 = records[0].epoch_start
	return UnpackedFeatures(
		BBISeries(np.asarray(onsets), np.asarray(intervals)),
		UniformSeries(np.asarray(powers, dtype=np.float64), 1.0 / motion_window_s, t0),
	)
