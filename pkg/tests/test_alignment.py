import itertools
from functools import lru_cache

import numpy as np
import pytest

from ppg_sleep.evaluation.alignment import default_band_width, dtw_align
from ppg_sleep.exceptions import InsufficientDataError, InvalidParamError

STEPS = ((1, 0), (0, 1), (1, 1))


def all_path_costs(test, ref):
	"""Total cost of every monotone path from (0, 0) to the end cell, one entry per path."""
	n, m = len(test), len(ref)
	costs = {}
	for i in range(n):
		for j in range(m):
			d = abs(test[i] - ref[j])
			if i == 0 and j == 0:
				costs[i, j] = np.array([d])
				continue
			parts = [costs[i - di, j - dj] for di, dj in STEPS if i >= di and j >= dj]
			costs[i, j] = np.concatenate(parts) + d
	return costs[n - 1, m - 1]


def banded_cost(test, ref, w):
	"""Minimum path cost by plain recursion over the band."""

	@lru_cache(maxsize=None)
	def best(i, j):
		if abs(i - j) > w or i < 0 or j < 0:
			return np.inf
		d = abs(test[i] - ref[j])
		if i == 0 and j == 0:
			return d
		return d + min(best(i - 1, j - 1), best(i - 1, j), best(i, j - 1))

	return best(len(test) - 1, len(ref) - 1)


def check_path(alignment, n, m):
	path = alignment.path
	assert tuple(path[0]) == (0, 0)
	assert tuple(path[-1]) == (n - 1, m - 1)
	steps = {tuple(step) for step in np.diff(path, axis=0)}
	assert steps <= set(STEPS)


def test_identical_sequences_align_diagonally():
	values = [800.0, 850.0, 900.0, 870.0, 820.0]
	alignment = dtw_align(values, values)
	assert alignment.cost == 0.0
	np.testing.assert_array_equal(alignment.test_index, np.arange(5))
	np.testing.assert_array_equal(alignment.ref_index, np.arange(5))


def test_single_deletion_costs_one_step():
	alignment = dtw_align([1.0, 5.0, 13.0, 17.0], [1.0, 5.0, 9.0, 13.0, 17.0])
	assert alignment.cost == pytest.approx(4.0)
	steps = np.diff(alignment.path, axis=0)
	assert np.sum(~np.all(steps == 1, axis=1)) == 1
	check_path(alignment, 4, 5)


def test_exhaustive_costs_cover_every_path():
	assert len(all_path_costs(np.zeros(3), np.zeros(3))) == 13
	assert len(all_path_costs(np.zeros(2), np.zeros(4))) == 7
	assert len(all_path_costs(np.zeros(10), np.zeros(10))) == 1462563


def test_cost_matches_exhaustive_search(rng):
	for trial in range(1000):
		n, m = rng.integers(1, 11, 2)
		if trial % 2:
			test, ref = rng.normal(size=n), rng.normal(size=m)
		else:
			test = rng.integers(0, 10, n).astype(float)
			ref = rng.integers(0, 10, m).astype(float)
		alignment = dtw_align(test, ref)
		assert alignment.cost == pytest.approx(all_path_costs(test, ref).min())
		check_path(alignment, n, m)


def test_cost_matches_banded_recursion(rng):
	for _ in range(1000):
		n, m = rng.integers(1, 11, 2)
		band = int(rng.integers(1, 4))
		test = tuple(rng.normal(size=n))
		ref = tuple(rng.normal(size=m))
		alignment = dtw_align(test, ref, band_width=band)
		w = max(band, abs(int(n) - int(m)))
		assert alignment.band_width == w
		assert alignment.cost == pytest.approx(banded_cost(test, ref, w))
		assert np.all(np.abs(alignment.test_index - alignment.ref_index) <= w)
		path_cost = np.sum(np.abs(np.take(test, alignment.test_index) - np.take(ref, alignment.ref_index)))
		assert path_cost == pytest.approx(alignment.cost)


def test_cost_is_symmetric(rng):
	for n, m in itertools.product((3, 17, 40), repeat=2):
		test = rng.uniform(600.0, 1200.0, n)
		ref = rng.uniform(600.0, 1200.0, m)
		assert dtw_align(test, ref).cost == pytest.approx(dtw_align(ref, test).cost)


def test_long_sequences_stay_in_band(rng):
	ref = rng.uniform(600.0, 1200.0, 2000)
	test = np.delete(ref, [100, 700, 1500]) + rng.normal(0.0, 5.0, 1997)
	alignment = dtw_align(test, ref)
	assert alignment.band_width == 100
	check_path(alignment, 1997, 2000)


def test_empty_sequences_are_rejected():
	with pytest.raises(InsufficientDataError):
		dtw_align([], [1.0])
	with pytest.raises(InsufficientDataError):
		dtw_align([1.0], [])


def test_band_width_must_be_positive():
	with pytest.raises(InvalidParamError):
		dtw_align([1.0, 2.0], [1.0, 2.0], band_width=0)


@pytest.mark.parametrize(('n', 'm', 'width'), [(100, 100, 10), (1000, 900, 50), (1, 1, 10), (201, 3, 11)])
def test_default_band_width(n, m, width):
	assert default_band_width(n, m) == width
