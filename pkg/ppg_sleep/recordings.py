"""
CSV input and output for the ppg-sleep package.

Raw recordings, reference annotations, pipeline outputs and synthetic
ground truth are plain CSV files with a header row; see ``schemas.py`` for
their column layouts.
"""

import logging
import os
import re
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np
import pandas as pd

from ppg_sleep.exceptions import InvalidSeriesError, ParseError, SchemaError
from ppg_sleep.schemas import PPG_CHANNELS, QUALITY_LOW, QUALITY_OK, get_schema
from ppg_sleep.signals.core import BBIFlag, BBISeries, BeatSeries, TimedSeries, UniformSeries
from ppg_sleep.utils.helpers import atomic_write, recording_name

logger = logging.getLogger(__name__)

_FLOAT_FORMAT = '%.6f'


@dataclass(frozen=True)
class Recording:
	"""One raw recording with the selected PPG channel."""

	name: str
	ppg: UniformSeries
	acc_x: UniformSeries
	acc_y: UniformSeries
	acc_z: UniformSeries


def _read_csv(file_path: str, kind: str, numeric: Tuple[str, ...]) -> pd.DataFrame:
	"""
	Read a CSV file and check it against its schema.

	Raises:
	    SchemaError: If the file is empty or a required column is missing.
	    ParseError: If a row is malformed or a numeric cell does not parse.

	"""
	try:
		df = pd.read_csv(file_path, skipinitialspace=True)
	except pd.errors.EmptyDataError:
		raise SchemaError(f'{file_path} is empty')
	except pd.errors.ParserError as e:
		match = re.search(r'line (\d+)', str(e))
		raise ParseError(f'{file_path}: malformed row', int(match.group(1)) if match else None)

	df.columns = [str(col).strip() for col in df.columns]
	missing = [col for col in get_schema(kind) if col not in df.columns]
	if missing:
		raise SchemaError(f'{file_path} lacks required columns {missing}')
	if df.empty:
		raise SchemaError(f'{file_path} has a header but no rows')

	for col in numeric:
		converted = pd.to_numeric(df[col], errors='coerce')
		bad = converted.isna()
		if bad.any():
			row = int(np.flatnonzero(bad.to_numpy())[0])
			# Header is line 1.
			raise ParseError(
				f'{file_path}: column {col} holds {df[col].iloc[row]!r}, expected a number',
				row + 2,
			)
		df[col] = converted.astype(float)
	return df


def _sampling_of(file_path: str, times: np.ndarray) -> Tuple[float, float]:
	steps = np.diff(times)
	if len(steps) == 0 or np.any(steps <= 0):
		raise InvalidSeriesError(f'{file_path}: t_s must be strictly increasing')
	fs = 1.0 / float(np.median(steps))
	return fs, float(times[0])


def read_recording(file_path: str, channel: str = 'green') -> Recording:
	"""
	Read a raw recording.

	Args:
	    file_path: CSV with columns t_s, ppg_green, ppg_ir, acc_x_g, acc_y_g, acc_z_g.
	    channel: PPG channel feeding beat detection, ``green`` or ``ir``.

	Returns:
	    Recording: The selected PPG channel and the three acceleration axes.

	Raises:
	    SchemaError: For an empty file or missing columns.
	    ParseError: For malformed rows.

	"""
	if channel not in PPG_CHANNELS:
		raise SchemaError(f'unknown PPG channel {channel!r}, expected one of {list(PPG_CHANNELS)}')
	columns = get_schema('recording')
	df = _read_csv(file_path, 'recording', tuple(columns))
	times = df['t_s'].to_numpy()
	fs, t0 = _sampling_of(file_path, times)
	logger.info(f'Read {len(df)} samples at {fs:.2f} Hz from {file_path}')
	return Recording(
		recording_name(file_path),
		UniformSeries(df[PPG_CHANNELS[channel]].to_numpy(), fs, t0),
		UniformSeries(df['acc_x_g'].to_numpy(), fs, t0),
		UniformSeries(df['acc_y_g'].to_numpy(), fs, t0),
		UniformSeries(df['acc_z_g'].to_numpy(), fs, t0),
	)


def write_recording(
	file_path: str,
	ppg_green: UniformSeries,
	ppg_ir: UniformSeries,
	acc: Tuple[UniformSeries, UniformSeries, UniformSeries],
) -> str:
	"""Write a raw recording CSV."""
	df = pd.DataFrame(
		{
			't_s': ppg_green.times,
			'ppg_green': ppg_green.values,
			'ppg_ir': ppg_ir.values,
			'acc_x_g': acc[0].values,
			'acc_y_g': acc[1].values,
			'acc_z_g': acc[2].values,
		}
	)
	return atomic_write(file_path, df.to_csv(index=False, float_format=_FLOAT_FORMAT))


def read_reference_beats(file_path: str) -> BeatSeries:
	"""Read ECG reference beats; rows with a zero ``ecg_beat`` marker are skipped."""
	df = _read_csv(file_path, 'ecg_reference', ('t_s', 'ecg_beat'))
	return BeatSeries(df.loc[df['ecg_beat'] != 0, 't_s'].to_numpy())


def write_reference_beats(file_path: str, beats: BeatSeries) -> str:
	"""Write ECG reference beats, one per row."""
	df = pd.DataFrame({'t_s': beats.times, 'ecg_beat': np.ones(len(beats), dtype=int)})
	return atomic_write(file_path, df.to_csv(index=False, float_format=_FLOAT_FORMAT))


def read_reference_resp(file_path: str) -> TimedSeries:
	"""Read the respiration-rate reference."""
	df = _read_csv(file_path, 'resp_reference', ('t_s', 'resp_rate_min'))
	return TimedSeries(df['t_s'].to_numpy(), df['resp_rate_min'].to_numpy())


def write_reference_resp(file_path: str, rates: TimedSeries) -> str:
	"""Write a respiration-rate reference."""
	df = pd.DataFrame({'t_s': rates.times, 'resp_rate_min': rates.values})
	return atomic_write(file_path, df.to_csv(index=False, float_format=_FLOAT_FORMAT))


def write_truth(file_path: str, true_bbi: BBISeries, true_br: TimedSeries) -> str:
	"""
	Write synthetic ground truth.

	Rows are keyed by time: interval rows at each beat onset, breathing-rate rows
	every second; the other column stays empty.
	"""
	bbi = pd.DataFrame({'t_s': true_bbi.onset_times, 'true_bbi_ms': true_bbi.intervals_ms})
	br = pd.DataFrame({'t_s': true_br.times, 'true_br_min': true_br.values})
	df = pd.concat([bbi, br], ignore_index=True).sort_values('t_s', kind='mergesort')
	df = df[get_schema('truth')]
	return atomic_write(
		file_path, df.to_csv(index=False, float_format=_FLOAT_FORMAT, na_rep='')
	)


def _quality(low: np.ndarray) -> np.ndarray:
	return np.where(low, QUALITY_LOW, QUALITY_OK)


def write_output(file_path: str, hr: TimedSeries, br: TimedSeries) -> str:
	"""
	Write heart rate and breathing rate to one CSV.

	Heart-rate rows (one per ten beats) and breathing-rate rows (one per
	second) are merged by time; the column a row does not carry stays empty.
	"""
	hr_df = pd.DataFrame(
		{'t_s': hr.times, 'hr_bpm': hr.values, 'br_min': np.nan, 'quality': _quality(hr.low_confidence)}
	)
	br_df = pd.DataFrame(
		{'t_s': br.times, 'hr_bpm': np.nan, 'br_min': br.values, 'quality': _quality(br.low_confidence)}
	)
	df = pd.concat([hr_df, br_df], ignore_index=True).sort_values('t_s', kind='mergesort')
	return atomic_write(
		file_path, df.to_csv(index=False, float_format=_FLOAT_FORMAT, na_rep='')
	)


def read_output(file_path: str) -> Tuple[TimedSeries, TimedSeries]:
	"""
	Read a pipeline output CSV.

	Returns:
	    Tuple[TimedSeries, TimedSeries]: Heart rate and breathing rate.

	"""
	df = _read_csv(file_path, 'output', ('t_s',))
	traces = []
	for col in ('hr_bpm', 'br_min'):
		rows = df[pd.to_numeric(df[col], errors='coerce').notna()]
		traces.append(
			TimedSeries(
				rows['t_s'].to_numpy(),
				rows[col].astype(float).to_numpy(),
				(rows['quality'] == QUALITY_LOW).to_numpy(),
			)
		)
	return traces[0], traces[1]


def write_bbi(file_path: str, bbi: BBISeries) -> str:
	"""Write intervals with their flags."""
	df = pd.DataFrame(
		{
			't_s': bbi.onset_times,
			'bbi_ms': bbi.intervals_ms,
			'flag': [BBIFlag(f).name.lower() for f in bbi.flags],
			'quality': _quality(bbi.low_confidence),
		}
	)
	return atomic_write(file_path, df.to_csv(index=False, float_format=_FLOAT_FORMAT))


def read_bbi(file_path: str) -> BBISeries:
	"""Read intervals written by write_bbi."""
	df = _read_csv(file_path, 'bbi', ('t_s', 'bbi_ms'))
	try:
		flags = [BBIFlag[str(name).upper()] for name in df['flag']]
	except KeyError as e:
		raise SchemaError(f'{file_path}: unknown interval flag {e}')
	return BBISeries(
		df['t_s'].to_numpy(),
		df['bbi_ms'].to_numpy(),
		flags,
		(df['quality'] == QUALITY_LOW).to_numpy(),
	)


def output_paths(out_dir: str, name: str) -> Dict[str, str]:
	"""File names the pipeline uses for one recording inside ``out_dir``."""
	return {
		'features': os.path.join(out_dir, f'{name}.ftr'),
		'output': os.path.join(out_dir, f'{name}_output.csv'),
		'bbi': os.path.join(out_dir, f'{name}_bbi.csv'),
		'ecg': os.path.join(out_dir, f'{name}_ecg.csv'),
		'resp': os.path.join(out_dir, f'{name}_resp.csv'),
		'truth': os.path.join(out_dir, f'{name}_truth.csv'),
		'recording': os.path.join(out_dir, f'{name}.csv'),
	}


def optional_path(path: Optional[str]) -> Optional[str]:
	"""Return ``path`` if it names an existing file, else None."""
	return path if path and os.path.exists(path) else None
