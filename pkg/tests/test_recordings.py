import os

import numpy as np
import pytest

from ppg_sleep.exceptions import ParseError, SchemaError
from ppg_sleep.recordings import (
	optional_path,
	output_paths,
	read_bbi,
	read_output,
	read_recording,
	read_reference_beats,
	read_reference_resp,
	write_bbi,
	write_output,
	write_recording,
	write_reference_beats,
	write_reference_resp,
)
from ppg_sleep.signals.core import BBIFlag, BBISeries, BeatSeries, TimedSeries, UniformSeries
from ppg_sleep.utils.helpers import atomic_write, ensure_directory_exists, format_table, recording_name

FS = 25.0


def write_sample(path, rng, n=250):
	green = UniformSeries(rng.normal(size=n), FS)
	ir = green.with_values(rng.normal(size=n))
	acc = tuple(green.with_values(rng.normal(0.0, 0.1, n)) for _ in range(3))
	write_recording(str(path), green, ir, acc)
	return green, ir, acc


def test_recording_round_trip(tmp_path, rng):
	green, ir, acc = write_sample(tmp_path / 'night1.csv', rng)
	recording = read_recording(str(tmp_path / 'night1.csv'))
	assert recording.name == 'night1'
	assert recording.ppg.fs == pytest.approx(FS)
	assert recording.ppg.t0 == 0.0
	np.testing.assert_allclose(recording.ppg.values, green.values, atol=1e-6)
	np.testing.assert_allclose(recording.acc_z.values, acc[2].values, atol=1e-6)
	infrared = read_recording(str(tmp_path / 'night1.csv'), channel='ir')
	np.testing.assert_allclose(infrared.ppg.values, ir.values, atol=1e-6)


def test_unknown_channel(tmp_path, rng):
	write_sample(tmp_path / 'night1.csv', rng)
	with pytest.raises(SchemaError):
		read_recording(str(tmp_path / 'night1.csv'), channel='red')


@pytest.mark.parametrize(
	'content',
	['', 't_s,ppg_green,ppg_ir,acc_x_g,acc_y_g,acc_z_g\n', 't_s,ppg_green\n0,1\n'],
)
def test_schema_errors(tmp_path, content):
	path = tmp_path / 'bad.csv'
	path.write_text(content)
	with pytest.raises(SchemaError):
		read_recording(str(path))


def test_parse_error_reports_line(tmp_path):
	path = tmp_path / 'bad.csv'
	path.write_text(
		't_s,ppg_green,ppg_ir,acc_x_g,acc_y_g,acc_z_g\n'
		'0.00,1,1,0,0,1\n'
		'0.04,1,1,0,0,1\n'
		'0.08,abc,1,0,0,1\n'
	)
	with pytest.raises(ParseError) as excinfo:
		read_recording(str(path))
	assert excinfo.value.line == 4
	assert 'line 4' in str(excinfo.value)


def test_reference_beats_skip_zero_markers(tmp_path):
	path = tmp_path / 'night1_ecg.csv'
	path.write_text('t_s,ecg_beat\n0.5,1\n1.0,0\n1.5,1\n2.4,1\n')
	np.testing.assert_allclose(read_reference_beats(str(path)).times, [0.5, 1.5, 2.4])
	write_reference_beats(str(path), BeatSeries([1.0, 2.0]))
	np.testing.assert_allclose(read_reference_beats(str(path)).times, [1.0, 2.0])


def test_reference_resp_round_trip(tmp_path):
	rates = TimedSeries(np.arange(10.0), np.linspace(12.0, 16.0, 10))
	path = write_reference_resp(str(tmp_path / 'night1_resp.csv'), rates)
	loaded = read_reference_resp(path)
	np.testing.assert_allclose(loaded.times, rates.times)
	np.testing.assert_allclose(loaded.values, rates.values, atol=1e-6)


def test_output_round_trip(tmp_path):
	hr = TimedSeries([5.0, 15.0, 25.0], [60.0, 61.5, 59.0], [False, True, False])
	br = TimedSeries(np.arange(60.0, 70.0), np.full(10, 15.0), np.arange(10) > 7)
	path = write_output(str(tmp_path / 'night1_output.csv'), hr, br)
	hr_back, br_back = read_output(path)
	np.testing.assert_allclose(hr_back.times, hr.times)
	np.testing.assert_allclose(hr_back.values, hr.values)
	assert list(hr_back.low_confidence) == [False, True, False]
	np.testing.assert_allclose(br_back.times, br.times)
	assert list(br_back.low_confidence) == list(br.low_confidence)


def test_bbi_round_trip(tmp_path):
	flags = [BBIFlag.VALID, BBIFlag.INTERPOLATED, BBIFlag.INTERPOLATED, BBIFlag.VALID]
	bbi = BBISeries([0.0, 1.0, 2.0, 3.0], [1000.0, 1000.0, 1000.0, 1000.0], flags, [False, True, True, False])
	loaded = read_bbi(write_bbi(str(tmp_path / 'night1_bbi.csv'), bbi))
	assert list(loaded.flags) == flags
	assert list(loaded.low_confidence) == [False, True, True, False]
	np.testing.assert_allclose(loaded.intervals_ms, bbi.intervals_ms)


def test_bbi_with_unknown_flag(tmp_path):
	path = tmp_path / 'night1_bbi.csv'
	path.write_text('t_s,bbi_ms,flag,quality\n0.0,1000,wobbly,ok\n')
	with pytest.raises(SchemaError):
		read_bbi(str(path))


def test_output_paths_and_optional_path(tmp_path):
	paths = output_paths(str(tmp_path), 'night1')
	assert os.path.basename(paths['features']) == 'night1.ftr'
	assert os.path.basename(paths['output']) == 'night1_output.csv'
	assert optional_path(paths['ecg']) is None
	assert optional_path(None) is None
	atomic_write(paths['ecg'], 't_s,ecg_beat\n')
	assert optional_path(paths['ecg']) == paths['ecg']


@pytest.mark.parametrize(
	('path', 'name'),
	[
		('night1.csv', 'night1'),
		('/data/night1.ftr', 'night1'),
		('out/night1_output.csv', 'night1'),
		('night1_ecg.csv', 'night1'),
		('night1_bbi.csv', 'night1'),
	],
)
def test_recording_name(path, name):
	assert recording_name(path) == name


def test_atomic_write_creates_directories(tmp_path):
	target = tmp_path / 'a' / 'b' / 'out.bin'
	atomic_write(str(target), b'\x00\x01')
	assert target.read_bytes() == b'\x00\x01'
	assert ensure_directory_exists(str(tmp_path / 'c')) == str(tmp_path / 'c')
	assert os.path.isdir(tmp_path / 'c')


def test_format_table():
	table = format_table([{'name': 'night1', 'mae': 1.234}, {'name': 'n2', 'mae': None}])
	lines = table.splitlines()
	assert lines[0] == 'name   | mae '
	assert lines[2] == 'night1 | 1.23'
	assert lines[3] == '    n2 |     '
	assert format_table([]) == 'No data found.'
