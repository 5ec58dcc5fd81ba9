import numpy as np
import pytest

from ppg_sleep.exceptions import InsufficientDataError, InvalidSeriesError
from ppg_sleep.signals.core import (
	BBIFlag,
	BBISeries,
	BeatSeries,
	FeatureRecord,
	TimedSeries,
	UniformSeries,
	interpolate_at,
	resample_linear,
)


def test_uniform_series_time_base():
	series = UniformSeries([1.0, 2.0, 3.0, 4.0], fs=2.0, t0=10.0)
	np.testing.assert_allclose(series.times, [10.0, 10.5, 11.0, 11.5])
	assert series.duration == 2.0
	assert len(series) == 4


@pytest.mark.parametrize('fs', [0.0, -25.0, float('nan'), float('inf')])
def test_uniform_series_rejects_bad_fs(fs):
	with pytest.raises(InvalidSeriesError):
		UniformSeries([1.0], fs=fs)


def test_series_are_read_only():
	series = UniformSeries([1.0, 2.0], fs=1.0)
	with pytest.raises(ValueError):
		series.values[0] = 5.0


def test_beat_series_must_increase():
	with pytest.raises(InvalidSeriesError):
		BeatSeries([0.0, 1.0, 1.0])
	assert len(BeatSeries([])) == 0


def test_bbi_series_defaults_and_end_times():
	bbi = BBISeries([0.0, 1.0, 1.8], [1000.0, 800.0, 1200.0])
	assert np.all(bbi.flags == BBIFlag.VALID)
	assert not bbi.low_confidence.any()
	np.testing.assert_allclose(bbi.end_times, [1.0, 1.8, 3.0])
	assert bbi.span_s == pytest.approx(3.0)


def test_bbi_series_rejects_non_positive_intervals():
	with pytest.raises(InvalidSeriesError):
		BBISeries([0.0, 1.0], [1000.0, 0.0])
	with pytest.raises(InvalidSeriesError):
		BBISeries([0.0, 1.0], [1000.0])


def test_bbi_series_subset_keeps_flags():
	flags = [BBIFlag.VALID, BBIFlag.MOTION, BBIFlag.VALID]
	bbi = BBISeries([0.0, 1.0, 2.0], [1000.0, 1000.0, 1000.0], flags, [False, True, False])
	part = bbi.subset(slice(1, 3))
	assert list(part.flags) == [BBIFlag.MOTION, BBIFlag.VALID]
	assert list(part.low_confidence) == [True, False]


def test_timed_series_length_check():
	with pytest.raises(InvalidSeriesError):
		TimedSeries([0.0, 1.0], [1.0])


def test_feature_record_holds_wire_precision():
	record = FeatureRecord(60.0, [(12.0, 999.6)], [0.1])
	assert record.bbis == ((12, 999),)
	assert record.motion_power == (float(np.float32(0.1)),)
	with pytest.raises(InvalidSeriesError):
		FeatureRecord(0.0, [(0, 70000)], [])


@pytest.mark.parametrize(
	('points', 'expected'),
	[
		([(0, 1), (1, 1)], [1, 1, 1]),
		([(0, 0), (1, 2)], [0, 1, 2]),
		([(0, 0), (0.4, 4), (1, 1)], [0, 3.5, 1]),
	],
)
def test_resample_linear_examples(points, expected):
	out = resample_linear(points, fs=2, t_start=0, t_end=1)
	assert out.fs == 2
	assert out.t0 == 0
	np.testing.assert_allclose(out.values, expected, rtol=0, atol=1e-12)


def test_resample_linear_is_exact_on_affine_input(rng):
	for _ in range(50):
		a, b = rng.normal(size=2) * 10
		times = np.sort(rng.uniform(0, 100, 30))
		times = np.unique(times)
		out = resample_linear((times, a * times + b), fs=2.0, t_start=times[0], t_end=times[-1])
		np.testing.assert_allclose(out.values, a * out.times + b, rtol=1e-9, atol=1e-9)


def test_resample_linear_does_not_overshoot(rng):
	times = np.cumsum(rng.uniform(0.3, 1.5, 200))
	values = rng.normal(size=200)
	out = resample_linear((times, values), fs=2.0)
	assert out.values.min() >= values.min()
	assert out.values.max() <= values.max()


def test_resample_linear_errors():
	with pytest.raises(InsufficientDataError):
		resample_linear([(0, 1)], fs=2)
	with pytest.raises(InvalidSeriesError):
		resample_linear([(0, 1), (2, 1), (1, 1)], fs=2)
	with pytest.raises(InvalidSeriesError):
		resample_linear([(0, 1), (1, 1)], fs=2, t_start=-1, t_end=1)


def test_interpolate_at_accepts_timed_series():
	series = TimedSeries([0.0, 10.0], [15.0, 25.0])
	np.testing.assert_allclose(interpolate_at(series, [0.0, 5.0, 10.0]), [15.0, 20.0, 25.0])
