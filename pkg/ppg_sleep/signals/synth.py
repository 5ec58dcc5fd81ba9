"""
Synthetic recordings with known ground truth.

Beat times follow an instantaneous heart rate modulated sinusoidally at the
breathing frequency (respiratory sinus arrhythmia). The PPG is a sum of
pulse templates whose steepest rise falls on each beat, plus baseline drift
and white noise; acceleration is gravity plus sensor noise plus
band-limited movement bursts.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import newton
from scipy.signal import butter, sosfiltfilt

from ppg_sleep.exceptions import InvalidParamError
from ppg_sleep.signals.beats import beats_to_intervals
from ppg_sleep.signals.core import BBISeries, BeatSeries, TimedSeries, UniformSeries
from ppg_sleep.utils.validators import validate_range

logger = logging.getLogger(__name__)

RISE_S = 0.15
DECAY_S = 0.4
DRIFT_HZ = 0.05
BURST_BAND_HZ = (0.5, 5.0)

RsaSchedule = Sequence[Tuple[float, float]]


@dataclass(frozen=True)
class SyntheticBeats:
	"""Beat times with the ground truth they were generated from."""

	beats: BeatSeries
	true_bbi: BBISeries
	true_br: TimedSeries


@dataclass(frozen=True)
class SyntheticRecording:
	"""A complete synthetic night."""

	ppg: UniformSeries
	acc_x: UniformSeries
	acc_y: UniformSeries
	acc_z: UniformSeries
	truth: SyntheticBeats


def _schedule(rsa_freq: Union[float, RsaSchedule]) -> Tuple[np.ndarray, np.ndarray]:
	if np.isscalar(rsa_freq):
		return np.array([0.0]), np.array([float(rsa_freq)])
	pairs = sorted((float(t), float(f)) for t, f in rsa_freq)
	if not pairs or pairs[0][0] != 0.0:
		raise InvalidParamError('RSA schedule must start at t = 0')
	starts, freqs = zip(*pairs)
	return np.array(starts), np.array(freqs)


def _segment_phases(starts: np.ndarray, freqs: np.ndarray) -> np.ndarray:
	# Phase is continuous across schedule steps.
	return np.concatenate(([0.0], np.cumsum(2 * np.pi * freqs[:-1] * np.diff(starts))))


def _segment_of(t: np.ndarray, starts: np.ndarray) -> np.ndarray:
	return np.clip(np.searchsorted(starts, t, side='right') - 1, 0, len(starts) - 1)


def _rsa_phase_at(t: np.ndarray, starts: np.ndarray, freqs: np.ndarray) -> np.ndarray:
	segment = _segment_of(t, starts)
	phases = _segment_phases(starts, freqs)
	return phases[segment] + 2 * np.pi * freqs[segment] * (t - starts[segment])


def _modulation_integral(t: np.ndarray, starts: np.ndarray, freqs: np.ndarray) -> np.ndarray:
	"""Integral of sin(phase(s)) ds from 0 to t, exact for piecewise-constant frequency."""
	phases = _segment_phases(starts, freqs)
	omega = 2 * np.pi * freqs
	completed = np.concatenate(
		([0.0], np.cumsum((np.cos(phases[:-1]) - np.cos(phases[1:])) / omega[:-1]))
	)
	segment = _segment_of(t, starts)
	partial = (np.cos(phases[segment]) - np.cos(_rsa_phase_at(t, starts, freqs))) / omega[segment]
	return completed[segment] + partial


def gen_beat_times(
	hr_base: float,
	rsa_freq: Union[float, RsaSchedule],
	rsa_depth: float,
	duration: float,
	seed: Optional[int] = None,
	jitter_std_s: float = 0.0,
) -> SyntheticBeats:
	"""
	Beat times under a sinusoidally modulated heart rate.

	The instantaneous rate is ``hr_base * (1 + rsa_depth * sin(phase(t)))``
	where the phase advances at ``2 pi rsa_freq``. A beat is emitted each time
	the integral of ``rate / 60`` crosses an integer, starting with a beat at
	``t = 0``.

	Args:
	    hr_base: Mean heart rate in beats per minute, 40-120.
	    rsa_freq: Breathing frequency in Hz (0.1-0.5), or a schedule of
	        (start s, frequency Hz) pairs beginning at 0.
	    rsa_depth: Relative modulation depth, 0-0.2.
	    duration: Length in seconds.
	    seed: Seed of the jitter generator.
	    jitter_std_s: Standard deviation of Gaussian beat jitter in seconds.

	Returns:
	    SyntheticBeats: Beats, the jitter-free intervals and the breathing-rate
	    trace (1 Hz, breaths per minute).

	Raises:
	    InvalidParamError: If a parameter is out of range.

	"""
	validate_range(hr_base, 40, 120, 'hr_base', InvalidParamError)
	validate_range(rsa_depth, 0, 0.2, 'rsa_depth', InvalidParamError)
	if duration <= 0:
		raise InvalidParamError(f'duration must be positive, got {duration}')
	if jitter_std_s < 0:
		raise InvalidParamError(f'jitter must be non-negative, got {jitter_std_s}')
	starts, freqs = _schedule(rsa_freq)
	for f in freqs:
		validate_range(f, 0.1, 0.5, 'rsa_freq', InvalidParamError)

	rate_hz = hr_base / 60.0

	def cycles(t):
		return rate_hz * (t + rsa_depth * _modulation_integral(t, starts, freqs)) - beat_index

	def cycles_rate(t):
		return rate_hz * (1 + rsa_depth * np.sin(_rsa_phase_at(t, starts, freqs)))

	beat_index = np.arange(int(np.floor(rate_hz * duration * (1 + rsa_depth))) + 2, dtype=float)
	guess = beat_index / rate_hz
	if rsa_depth == 0:
		times = guess
	else:
		times = np.asarray(newton(cycles, guess, fprime=cycles_rate, tol=1e-10, maxiter=100))
	times = times[times <= duration + 1e-9]

	true_bbi = beats_to_intervals(BeatSeries(times))
	if jitter_std_s > 0:
		rng = np.random.default_rng(seed)
		times = np.sort(times + rng.normal(0.0, jitter_std_s, len(times)))

	trace_t = np.arange(0.0, np.floor(duration) + 1.0)
	segment = np.searchsorted(starts, trace_t, side='right') - 1
	true_br = TimedSeries(trace_t, 60.0 * freqs[segment])
	return SyntheticBeats(BeatSeries(times), true_bbi, true_br)


def pulse_template(tau: np.ndarray) -> np.ndarray:
	"""
	One PPG pulse, unit amplitude, as a function of time from the beat.

	A raised-sine rise over ``RISE_S`` centred on ``tau = 0`` (so the steepest
	slope is at the beat) followed by a raised-cosine decay over ``DECAY_S``.
	"""
	tau = np.asarray(tau, dtype=float)
	half = RISE_S / 2
	out = np.zeros_like(tau)
	rise = (tau >= -half) & (tau < half)
	out[rise] = 0.5 * (1 + np.sin(np.pi * tau[rise] / RISE_S))
	decay = (tau >= half) & (tau < half + DECAY_S)
	out[decay] = 0.5 * (1 + np.cos(np.pi * (tau[decay] - half) / DECAY_S))
	return out


def gen_ppg(
	beats: BeatSeries,
	duration: float,
	fs: float = 25.0,
	noise_std: float = 0.0,
	drift_amp: float = 0.0,
	amplitude: float = 1.0,
	seed: Optional[int] = None,
) -> UniformSeries:
	"""
	PPG built from pulse templates placed at beat times.

	Args:
	    beats: Beat times.
	    duration: Length in seconds.
	    fs: Sampling frequency, at least 25 Hz.
	    noise_std: Standard deviation of white noise.
	    drift_amp: Amplitude of the 0.05 Hz baseline drift.
	    amplitude: Pulse amplitude.
	    seed: Seed of the noise generator.

	Returns:
	    UniformSeries: The PPG starting at t = 0.

	Raises:
	    InvalidParamError: If ``fs`` is below 25 Hz.

	"""
	if fs < 25:
		raise InvalidParamError(f'fs must be at least 25 Hz, got {fs}')
	n = int(np.floor(duration * fs))
	t = np.arange(n) / fs
	signal = np.zeros(n)
	support = int(np.ceil((RISE_S / 2 + DECAY_S) * fs)) + 1
	for beat in beats.times:
		first = max(0, int(np.floor((beat - RISE_S / 2) * fs)))
		last = min(n, first + support + 1)
		if first >= n:
			break
		signal[first:last] += pulse_template(t[first:last] - beat)
	signal *= amplitude
	signal += drift_amp * np.sin(2 * np.pi * DRIFT_HZ * t)
	if noise_std > 0:
		signal += np.random.default_rng(seed).normal(0.0, noise_std, n)
	return UniformSeries(signal, fs, 0.0)


def gen_accel(
	duration: float,
	fs: float = 25.0,
	bursts: Sequence[Tuple[float, float, float]] = (),
	noise_std: float = 0.0,
	seed: Optional[int] = None,
) -> Tuple[UniformSeries, UniformSeries, UniformSeries]:
	"""
	Three-axis acceleration: gravity on z, sensor noise and movement bursts.

	Args:
	    duration: Length in seconds.
	    fs: Sampling frequency.
	    bursts: (start s, end s, amplitude g) triples; the amplitude is the
	        standard deviation of the 0.5-5 Hz movement on each axis.
	    noise_std: Standard deviation of white noise in g.
	    seed: Seed of the noise generator.

	Returns:
	    Tuple[UniformSeries, UniformSeries, UniformSeries]: x, y and z in g.

	Raises:
	    InvalidParamError: For bursts outside the recording or overlapping each other.

	"""
	ordered = sorted(bursts)
	for start, end, amp in ordered:
		if not 0 <= start < end <= duration:
			raise InvalidParamError(f'burst ({start}, {end}) outside [0, {duration}] s')
		if amp < 0:
			raise InvalidParamError(f'burst amplitude must be non-negative, got {amp}')
	for (_, end, _), (start, _, _) in zip(ordered, ordered[1:]):
		if start < end:
			raise InvalidParamError(f'bursts overlap at {start} s')

	rng = np.random.default_rng(seed)
	n = int(np.floor(duration * fs))
	axes = np.zeros((3, n))
	axes[2] = 1.0
	if noise_std > 0:
		axes += rng.normal(0.0, noise_std, (3, n))

	high = min(BURST_BAND_HZ[1], 0.45 * fs)
	sos = butter(2, [BURST_BAND_HZ[0], high], btype='bandpass', fs=fs, output='sos')
	for start, end, amp in ordered:
		first, last = int(round(start * fs)), min(n, int(round(end * fs)))
		if last - first < 2:
			continue
		raw = rng.normal(0.0, 1.0, (3, last - first + 2 * int(fs)))
		movement = sosfiltfilt(sos, raw, axis=1)[:, int(fs) : int(fs) + last - first]
		movement /= movement.std(axis=1, keepdims=True)
		axes[:, first:last] += amp * movement
	return tuple(UniformSeries(axis, fs, 0.0) for axis in axes)


def synthesize_recording(
	duration: float,
	hr_base: float = 60.0,
	rsa_freq: Union[float, RsaSchedule] = 0.25,
	rsa_depth: float = 0.05,
	fs: float = 25.0,
	ppg_noise_std: float = 0.0,
	drift_amp: float = 0.0,
	jitter_std_s: float = 0.0,
	accel_noise_std: float = 0.005,
	bursts: Sequence[Tuple[float, float, float]] = (),
	artifact_gain: float = 0.0,
	seed: Optional[int] = None,
) -> SyntheticRecording:
	"""
	Generate a full synthetic night.

	The three generators draw from independent streams spawned from ``seed``.
	With a non-zero ``artifact_gain`` the movement picked up by the
	accelerometer also leaks into the PPG.

	Returns:
	    SyntheticRecording: PPG, acceleration and ground truth.

	"""
	beat_seed, ppg_seed, accel_seed = np.random.SeedSequence(seed).spawn(3)
	truth = gen_beat_times(
		hr_base, rsa_freq, rsa_depth, duration, _as_int(beat_seed), jitter_std_s
	)
	ppg = gen_ppg(truth.beats, duration, fs, ppg_noise_std, drift_amp, seed=_as_int(ppg_seed))
	x, y, z = gen_accel(duration, fs, bursts, accel_noise_std, _as_int(accel_seed))
	if artifact_gain:
		ppg = couple_motion(ppg, x, y, z, artifact_gain)
	logger.info(
		f'Synthesized {duration:.0f} s recording with {len(truth.beats)} beats '
		f'and {len(bursts)} motion bursts'
	)
	return SyntheticRecording(ppg, x, y, z, truth)


def couple_motion(
	ppg: UniformSeries,
	x: UniformSeries,
	y: UniformSeries,
	z: UniformSeries,
	gain: float,
) -> UniformSeries:
	"""Add ``gain`` times the movement along each axis (gravity removed) to the PPG."""
	movement = x.values + y.values + (z.values - 1.0)
	return ppg.with_values(ppg.values + gain * movement)


def _as_int(sequence: np.random.SeedSequence) -> int:
	return int(sequence.generate_state(1)[0])
