"""
Banded dynamic time warping of interval sequences.

The accumulated cost is kept in two rolling rows indexed by the offset from
the diagonal; only the step directions are stored for the full band, as int8.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numba as nb
import numpy as np

from ppg_sleep.exceptions import InsufficientDataError, InvalidParamError
from ppg_sleep.utils.validators import validate_finite

logger = logging.getLogger(__name__)

DEFAULT_BAND_MIN = 10
DEFAULT_BAND_FRACTION = 0.05

_DIAGONAL = 0
_UP = 1
_LEFT = 2


@dataclass(frozen=True, eq=False)
class Alignment:
	"""
	A warping path between a test and a reference sequence.

	Attributes:
	    path: (L, 2) array of (test index, reference index) pairs, starting at
	        (0, 0) and ending at the last index of both sequences.
	    cost: Sum of absolute differences along the path.
	    band_width: Band width actually used.

	"""

	path: np.ndarray
	cost: float
	band_width: int

	@property
	def test_index(self) -> np.ndarray:
		return self.path[:, 0]

	@property
	def ref_index(self) -> np.ndarray:
		return self.path[:, 1]

	def __len__(self) -> int:
		return len(self.path)


def default_band_width(
	n: int, m: int, minimum: int = DEFAULT_BAND_MIN, fraction: float = DEFAULT_BAND_FRACTION
) -> int:
	"""Band width of ``max(minimum, ceil(fraction * longest length))``."""
	return max(minimum, math.ceil(fraction * max(n, m)))


@nb.njit(cache=True)
def _banded_directions(test, ref, w):
	n = len(test)
	m = len(ref)
	width = 2 * w + 1
	direction = np.full((n, width), -1, dtype=np.int8)
	prev = np.full(width, np.inf)
	cur = np.full(width, np.inf)
	for i in range(n):
		for k in range(width):
			j = i - w + k
			if j < 0 or j >= m:
				cur[k] = np.inf
				continue
			d = abs(test[i] - ref[j])
			if i == 0 and j == 0:
				cur[k] = d
				direction[i, k] = _DIAGONAL
				continue
			best = np.inf
			step = -1
			# prev[k] is (i-1, j-1), prev[k+1] is (i-1, j), cur[k-1] is (i, j-1)
			if i > 0 and j > 0 and prev[k] < best:
				best = prev[k]
				step = _DIAGONAL
			if i > 0 and k + 1 < width and prev[k + 1] < best:
				best = prev[k + 1]
				step = _UP
			if k > 0 and cur[k - 1] < best:
				best = cur[k - 1]
				step = _LEFT
			cur[k] = best + d
			direction[i, k] = step
		prev, cur = cur, prev
	return prev[(m - 1) - (n - 1) + w], direction


@nb.njit(cache=True)
def _traceback(direction, n, m, w):
	path = np.empty((n + m, 2), dtype=np.int64)
	i = n - 1
	j = m - 1
	count = 0
	while True:
		path[count, 0] = i
		path[count, 1] = j
		count += 1
		if i == 0 and j == 0:
			break
		step = direction[i, j - i + w]
		if step == _DIAGONAL:
			i -= 1
			j -= 1
		elif step == _UP:
			i -= 1
		else:
			j -= 1
	return path[:count][::-1].copy()


def dtw_align(test, ref, band_width: Optional[int] = None) -> Alignment:
	"""
	Align two value sequences with dynamic time warping.

	Steps are (1, 0), (0, 1) and (1, 1) and cells are restricted to
	``|i - j| <= w`` where ``w = max(band_width, |len(test) - len(ref)|)``, so
	the end cell is always reachable. The local cost is the absolute
	difference of the values. On ties the traceback prefers the diagonal.

	Args:
	    test: Test sequence.
	    ref: Reference sequence.
	    band_width: Sakoe-Chiba band half-width; defaults to
	        ``max(10, ceil(0.05 * longest length))``.

	Returns:
	    Alignment: The minimum-cost path and its cost.

	Raises:
	    InsufficientDataError: If either sequence is empty.
	    InvalidParamError: If ``band_width`` is below 1.

	"""
	test = np.ascontiguousarray(test, dtype=np.float64)
	ref = np.ascontiguousarray(ref, dtype=np.float64)
	if len(test) == 0 or len(ref) == 0:
		raise InsufficientDataError('cannot align an empty sequence')
	validate_finite(test, 'test sequence')
	validate_finite(ref, 'reference sequence')
	n, m = len(test), len(ref)
	if band_width is None:
		band_width = default_band_width(n, m)
	elif band_width < 1:
		raise InvalidParamError(f'band_width must be at least 1, got {band_width}')
	w = max(int(band_width), abs(n - m))
	logger.debug(f'Aligning {n} test against {m} reference values with band {w}')

	cost, direction = _banded_directions(test, ref, w)
	path = _traceback(direction, n, m, w)
	return Alignment(path, float(cost), w)
