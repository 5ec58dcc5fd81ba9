"""
Error metrics and per-metric summary statistics.
"""

from dataclasses import asdict, dataclass
from typing import Dict, Sequence, Tuple

import numpy as np

from ppg_sleep.exceptions import InsufficientDataError, InvalidInputError, ZeroReferenceError
from ppg_sleep.utils.validators import validate_finite

STATISTICS: Tuple[str, ...] = ('min', 'q25', 'median', 'q75', 'max', 'mean')


def _pair(a: Sequence[float], b: Sequence[float]) -> Tuple[np.ndarray, np.ndarray]:
	a = np.asarray(a, dtype=np.float64)
	b = np.asarray(b, dtype=np.float64)
	if a.shape != b.shape or a.ndim != 1:
		raise InvalidInputError(f'sequences must be one-dimensional and equally long ({a.shape} vs {b.shape})')
	if len(a) == 0:
		raise InsufficientDataError('cannot compute an error over empty sequences')
	validate_finite(a, 'estimate')
	validate_finite(b, 'reference')
	return a, b


def mae(a: Sequence[float], b: Sequence[float]) -> float:
	"""
	Mean absolute error.

	Raises:
	    InvalidInputError: If the lengths differ.
	    InsufficientDataError: If both are empty.

	"""
	a, b = _pair(a, b)
	return float(np.mean(np.abs(a - b)))


def mape(a: Sequence[float], b: Sequence[float]) -> float:
	"""
	Mean absolute percentage error of ``a`` against the reference ``b``.

	Raises:
	    InvalidInputError: If the lengths differ.
	    ZeroReferenceError: If any reference value is zero.

	"""
	a, b = _pair(a, b)
	if np.any(b == 0):
		raise ZeroReferenceError('reference holds a zero value')
	return float(100.0 * np.mean(np.abs(a - b) / np.abs(b)))


@dataclass(frozen=True)
class SummaryRow:
	"""Order statistics and mean of one metric across recordings."""

	min: float
	q25: float
	median: float
	q75: float
	max: float
	mean: float

	def to_dict(self) -> Dict[str, float]:
		return asdict(self)

	def as_tuple(self) -> Tuple[float, ...]:
		return tuple(getattr(self, name) for name in STATISTICS)


def summarize(values: Sequence[float]) -> SummaryRow:
	"""
	Summarize one metric over recordings.

	Quartiles use linear interpolation between order statistics (numpy's
	default ``linear`` method).

	Args:
	    values: One value per recording.

	Returns:
	    SummaryRow: min, q25, median, q75, max and arithmetic mean.

	Raises:
	    InsufficientDataError: If no value is given.

	"""
	values = np.asarray(values, dtype=np.float64).ravel()
	if len(values) == 0:
		raise InsufficientDataError('cannot summarize an empty set of values')
	validate_finite(values, 'metric values')
	q = np.quantile(values, [0.0, 0.25, 0.5, 0.75, 1.0])
	return SummaryRow(
		min=float(q[0]),
		q25=float(q[1]),
		median=float(q[2]),
		q75=float(q[3]),
		max=float(q[4]),
		mean=float(np.mean(values)),
	)
