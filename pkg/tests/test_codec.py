import numpy as np
import pytest

from ppg_sleep.exceptions import DecodeError, InsufficientDataError, InvalidSeriesError, ValidationError
from ppg_sleep.signals.codec import (
	decode_feature_stream,
	decode_features,
	encode_features,
	read_feature_file,
	write_feature_file,
)
from ppg_sleep.signals.beats import beats_to_intervals
from ppg_sleep.signals.cardio import correct_intervals, flag_intervals
from ppg_sleep.signals.core import BBIFlag, BBISeries, BeatSeries, FeatureRecord, UniformSeries
from ppg_sleep.signals.epochs import pack_epochs, unpack_epochs
from ppg_sleep.signals.synth import gen_beat_times

HEADER_SIZE = 20


def random_records(rng, count):
	records = []
	for k in range(count):
		n_bbi = int(rng.integers(0, 90))
		offsets = np.sort(rng.integers(0, 60000, n_bbi))
		intervals = rng.integers(1, 2**16, n_bbi)
		powers = rng.exponential(0.01, int(rng.integers(0, 61)))
		records.append(FeatureRecord(60.0 * k, list(zip(offsets, intervals)), powers))
	return records


def test_empty_stream_is_header_only():
	data = encode_features([])
	assert len(data) == HEADER_SIZE
	assert decode_features(data) == []


def test_single_record_round_trip():
	records = [FeatureRecord(0.0, [(0, 1000)], [])]
	assert decode_features(encode_features(records)) == records


def test_random_records_round_trip(rng):
	records = random_records(rng, 10_000)
	data = encode_features(records, motion_window_s=0.5)
	stream = decode_feature_stream(data)
	assert stream.motion_window_s == 0.5
	assert list(stream.records) == records
	assert encode_features(stream.records, 0.5) == data


def test_many_small_streams_round_trip(rng):
	for _ in range(300):
		records = random_records(rng, int(rng.integers(0, 4)))
		data = encode_features(records)
		assert encode_features(decode_features(data)) == data


def test_truncated_stream_reports_offset(rng):
	data = encode_features(random_records(rng, 3))
	with pytest.raises(DecodeError) as excinfo:
		decode_features(data[:-3])
	assert excinfo.value.offset >= HEADER_SIZE
	assert 'byte offset' in str(excinfo.value)

	with pytest.raises(DecodeError) as excinfo:
		decode_features(data[:10])
	assert excinfo.value.offset == 10


def test_corrupt_header_and_trailing_bytes():
	data = encode_features([FeatureRecord(0.0, [(0, 1000)], [0.0])])
	with pytest.raises(DecodeError) as excinfo:
		decode_features(b'XXXX' + data[4:])
	assert excinfo.value.offset == 0
	with pytest.raises(DecodeError):
		decode_features(data + b'\x00')


def test_records_must_be_epoch_sorted():
	with pytest.raises(InvalidSeriesError):
		encode_features([FeatureRecord(60.0), FeatureRecord(0.0)])


def test_feature_file_round_trip(tmp_path, rng):
	records = random_records(rng, 5)
	path = write_feature_file(str(tmp_path / 'night.ftr'), records, 1.0)
	stream = read_feature_file(path)
	assert list(stream.records) == records
	assert stream.motion_window_s == 1.0


def test_pack_epochs_assigns_intervals_by_onset():
	bbi = BBISeries([0.5, 59.9, 60.0, 130.2], [1000.0, 1000.0, 1000.0, 1000.0])
	powers = UniformSeries(np.zeros(150), fs=1.0)
	records = pack_epochs(bbi, powers, epoch_s=60.0)
	assert [r.epoch_start for r in records] == [0.0, 60.0, 120.0]
	assert records[0].bbis == ((500, 1000), (59900, 1000))
	assert records[1].bbis == ((0, 1000),)
	assert records[2].bbis == ((10200, 1000),)
	assert [len(r.motion_power) for r in records] == [60, 60, 30]


def test_pack_epochs_keeps_empty_epochs():
	bbi = BBISeries([1.0, 2.0, 200.0], [1000.0, 1000.0, 900.0])
	powers = UniformSeries(np.zeros(240), fs=1.0)
	records = pack_epochs(bbi, powers, epoch_s=60.0)
	assert len(records) == 4
	assert records[1].bbis == ()
	assert records[2].bbis == ()


def test_pack_then_unpack_preserves_intervals(rng):
	onsets = np.cumsum(rng.uniform(0.6, 1.2, 400))
	intervals = np.diff(np.append(onsets, onsets[-1] + 1.0)) * 1000.0
	bbi = BBISeries(onsets, intervals)
	powers = UniformSeries(rng.exponential(0.001, int(onsets[-1]) + 2), fs=1.0)
	unpacked = unpack_epochs(pack_epochs(bbi, powers, 60.0), 1.0)
	np.testing.assert_allclose(unpacked.bbi.onset_times, onsets, atol=6e-4)
	np.testing.assert_allclose(unpacked.bbi.intervals_ms, intervals, atol=1.001)
	assert len(unpacked.powers) == len(powers)
	np.testing.assert_allclose(unpacked.powers.values, powers.values, rtol=1e-6)


def test_unpacked_intervals_tile_their_onsets():
	truth = gen_beat_times(62.0, 0.25, 0.08, 600.0)
	bbi = beats_to_intervals(truth.beats)
	powers = UniformSeries(np.zeros(600), fs=1.0)
	records = decode_features(encode_features(pack_epochs(bbi, powers, 60.0)))
	unpacked = unpack_epochs(records, 1.0).bbi
	assert len(unpacked) == len(bbi)
	spacing = np.diff(unpacked.onset_times) * 1000.0
	np.testing.assert_allclose(spacing, unpacked.intervals_ms[:-1], rtol=0, atol=1e-6)
	np.testing.assert_allclose(unpacked.intervals_ms, bbi.intervals_ms, atol=1.001)


def test_pack_epochs_splits_overlong_gaps():
	times = np.concatenate((np.arange(0.0, 11.0), np.arange(110.0, 121.0)))
	bbi = beats_to_intervals(BeatSeries(times))
	records = pack_epochs(bbi, UniformSeries(np.zeros(121), fs=1.0), epoch_s=60.0)
	unpacked = unpack_epochs(records, 1.0).bbi
	assert list(unpacked.intervals_ms) == [1000.0] * 10 + [50000.0, 50000.0] + [1000.0] * 10
	spacing = np.diff(unpacked.onset_times) * 1000.0
	np.testing.assert_allclose(spacing, unpacked.intervals_ms[:-1], rtol=0, atol=1e-6)

	corrected = correct_intervals(flag_intervals(unpacked))
	assert list(np.flatnonzero(corrected.flags == BBIFlag.INTERPOLATED)) == [10, 11]
	assert list(np.flatnonzero(corrected.low_confidence)) == [10, 11]
	np.testing.assert_allclose(corrected.intervals_ms, 1000.0)


def test_pack_epochs_requires_whole_milliseconds():
	bbi = BBISeries([0.0, 1.0], [1000.0, 1000.0])
	with pytest.raises(ValidationError):
		pack_epochs(bbi, UniformSeries(np.zeros(10), fs=2000.0), epoch_s=0.0005)


def test_pack_epochs_requires_whole_windows():
	bbi = BBISeries([0.0, 1.0], [1000.0, 1000.0])
	with pytest.raises(ValidationError):
		pack_epochs(bbi, UniformSeries(np.zeros(10), fs=1.0), epoch_s=2.5)


def test_unpack_needs_two_intervals():
	with pytest.raises(InsufficientDataError):
		unpack_epochs([FeatureRecord(0.0, [(0, 1000)], [0.0])])
