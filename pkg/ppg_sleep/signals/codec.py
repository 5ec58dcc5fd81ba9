"""
Binary feature format exchanged between the wearable and the server stage.

Layout (all little-endian)::

    header   magic 'PPGF' | version u16 | reserved u16 | motion window s f64 | record count u32
    record   epoch start s f64 | interval count u16 | window count u16
             interval count x (onset offset ms u32, interval ms u16)
             window count x motion power g² f32
"""

import logging
import struct
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from ppg_sleep.exceptions import DecodeError, InvalidSeriesError
from ppg_sleep.signals.core import FeatureRecord
from ppg_sleep.utils.helpers import atomic_write

logger = logging.getLogger(__name__)

MAGIC = b'PPGF'
FORMAT_VERSION = 1
FILE_EXTENSION = '.ftr'

_HEADER = struct.Struct('<4sHHdI')
_RECORD = struct.Struct('<dHH')
_PAIR = np.dtype([('offset', '<u4'), ('interval', '<u2')])
_POWER = np.dtype('<f4')
_MAX_COUNT = 2**16 - 1


@dataclass(frozen=True)
class FeatureStream:
	"""A decoded feature stream: motion window length plus the epoch records."""

	motion_window_s: float
	records: Tuple[FeatureRecord, ...]


def encode_features(
	records: Sequence[FeatureRecord], motion_window_s: float = 1.0
) -> bytes:
	"""
	Serialize epoch records.

	Args:
	    records: Records sorted by epoch start.
	    motion_window_s: Length of one motion-power window in seconds.

	Returns:
	    bytes: The encoded stream.

	Raises:
	    InvalidSeriesError: If records are not epoch-sorted or a record overflows the counters.

	"""
	chunks = [_HEADER.pack(MAGIC, FORMAT_VERSION, 0, float(motion_window_s), len(records))]
	previous = None
	for record in records:
		if previous is not None and record.epoch_start < previous:
			raise InvalidSeriesError('feature records must be sorted by epoch start')
		previous = record.epoch_start
		if len(record.bbis) > _MAX_COUNT or len(record.motion_power) > _MAX_COUNT:
			raise InvalidSeriesError(
				f'epoch at {record.epoch_start} s holds more than {_MAX_COUNT} entries'
			)
		chunks.append(
			_RECORD.pack(record.epoch_start, len(record.bbis), len(record.motion_power))
		)
		pairs = np.array(record.bbis, dtype=np.int64).reshape(-1, 2)
		packed = np.empty(len(pairs), dtype=_PAIR)
		packed['offset'] = pairs[:, 0]
		packed['interval'] = pairs[:, 1]
		chunks.append(packed.tobytes())
		chunks.append(np.asarray(record.motion_power, dtype=_POWER).tobytes())
	return b''.join(chunks)


def decode_feature_stream(data: bytes) -> FeatureStream:
	"""
	Parse a feature stream, keeping the header fields.

	Args:
	    data: Bytes produced by encode_features.

	Returns:
	    FeatureStream: Header window length and the records.

	Raises:
	    DecodeError: On a bad header, truncation or trailing bytes.

	"""
	view = memoryview(data)
	if len(view) < _HEADER.size:
		raise DecodeError('stream shorter than header', len(view))
	magic, version, _, window_s, count = _HEADER.unpack_from(view, 0)
	if magic != MAGIC:
		raise DecodeError(f'bad magic {magic!r}', 0)
	if version != FORMAT_VERSION:
		raise DecodeError(f'unsupported format version {version}', 4)

	offset = _HEADER.size
	records: List[FeatureRecord] = []
	for index in range(count):
		if offset + _RECORD.size > len(view):
			raise DecodeError(f'truncated header of record {index}', offset)
		epoch_start, n_bbi, n_power = _RECORD.unpack_from(view, offset)
		offset += _RECORD.size

		body = n_bbi * _PAIR.itemsize + n_power * _POWER.itemsize
		if offset + body > len(view):
			raise DecodeError(f'truncated body of record {index}', offset)
		pairs = np.frombuffer(view, dtype=_PAIR, count=n_bbi, offset=offset)
		offset += n_bbi * _PAIR.itemsize
		powers = np.frombuffer(view, dtype=_POWER, count=n_power, offset=offset)
		offset += n_power * _POWER.itemsize

		if np.any(pairs['interval'] == 0):
			raise DecodeError(f'zero interval in record {index}', offset - body)
		records.append(
			FeatureRecord(
				epoch_start,
				tuple(zip(pairs['offset'].tolist(), pairs['interval'].tolist())),
				tuple(powers.tolist()),
			)
		)

	if offset != len(view):
		raise DecodeError(f'{len(view) - offset} trailing bytes after last record', offset)
	return FeatureStream(window_s, tuple(records))


def decode_features(data: bytes) -> List[FeatureRecord]:
	"""
	Parse a feature stream into records.

	Args:
	    data: Bytes produced by encode_features.

	Returns:
	    List[FeatureRecord]: The decoded records.

	Raises:
	    DecodeError: On a bad header, truncation or trailing bytes.

	"""
	return list(decode_feature_stream(data).records)


def write_feature_file(
	file_path: str, records: Sequence[FeatureRecord], motion_window_s: float
) -> str:
	"""Encode records and write them atomically to ``file_path``."""
	payload = encode_features(records, motion_window_s)
	logger.info(f'Writing {len(records)} feature records ({len(payload)} bytes) to {file_path}')
	return atomic_write(file_path, payload)


def read_feature_file(file_path: str) -> FeatureStream:
	"""Read and decode a feature file."""
	with open(file_path, 'rb') as f:
		return decode_feature_stream(f.read())
