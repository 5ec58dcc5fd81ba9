"""
Breathing rate from heart rate variability.

The corrected interval series is resampled at 2 Hz and band-passed to the
autonomic band. A 20th-order autoregressive model of the result is adapted
sample by sample with normalized LMS; once per second its spectrum is
evaluated, the dominant peak in the respiratory band is located, and the
breathing-rate estimate moves towards that peak with the peak's share of
the band power as learning gain.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import trapezoid
from scipy.signal import butter, sosfiltfilt

from ppg_sleep.exceptions import (
	InsufficientDataError,
	InvalidGainError,
	InvalidGridError,
	InvalidParamError,
	InvalidSeriesError,
	NonFiniteInputError,
	SpectrumError,
	ValidationError,
)
from ppg_sleep.signals.beats import refine_peak_parabolic
from ppg_sleep.signals.core import BBISeries, TimedSeries, UniformSeries, resample_linear

logger = logging.getLogger(__name__)

HRV_FS = 2.0
HRV_BAND_HZ = (0.04, 0.5)
RESP_BAND_HZ = (0.1, 0.5)
AR_ORDER = 20
MIN_FILTER_SAMPLES = 120
# Spectrum rows evaluated per batch in the pipeline.
_PSD_BLOCK = 2048


@dataclass(frozen=True)
class RespirationParams:
	"""Tunables of the breathing-rate pipeline."""

	resample_fs: float = HRV_FS
	hrv_band_hz: Tuple[float, float] = HRV_BAND_HZ
	filter_order: int = 2
	filter_corner_scale: Tuple[float, float] = (0.75, 1.2)
	ar_order: int = AR_ORDER
	nlms_mu: float = 0.05
	nlms_eps: float = 1e-8
	spectrum_step_s: float = 1.0
	grid_step_hz: float = 0.002
	grid_max_hz: float = 1.0
	resp_band_hz: Tuple[float, float] = RESP_BAND_HZ
	peak_half_width_hz: float = 0.02
	initial_rate_min: float = 15.0
	warmup_s: float = 60.0
	min_duration_s: float = 300.0
	br_update: str = 'linear'

	@classmethod
	def from_settings(cls, settings) -> 'RespirationParams':
		"""Pick the respiration tunables out of PipelineSettings."""
		return cls(**{name: getattr(settings, name) for name in cls.__dataclass_fields__})


def design_hrv_bandpass(
	fs: float = HRV_FS,
	band: Tuple[float, float] = HRV_BAND_HZ,
	order: int = 2,
	corner_scale: Tuple[float, float] = (0.75, 1.2),
) -> np.ndarray:
	"""
	Butterworth band-pass sections for forward-backward filtering.

	The design corners sit at ``band[0] * corner_scale[0]`` and
	``band[1] * corner_scale[1]`` so that the squared (forward-backward)
	response stays within 3 dB over the requested band.

	Returns:
	    np.ndarray: Second-order sections.

	Raises:
	    ValidationError: If the corners are not inside (0, fs / 2).

	"""
	low = band[0] * corner_scale[0]
	high = band[1] * corner_scale[1]
	if not 0 < low < high < fs / 2:
		raise ValidationError(
			f'band-pass corners {low:.4f}-{high:.4f} Hz must lie inside (0, {fs / 2}) Hz'
		)
	logger.debug(f'HRV band-pass corners {low:.4f}-{high:.4f} Hz, order {2 * order}')
	return butter(order, [low, high], btype='bandpass', fs=fs, output='sos')


def bandpass_hrv(
	series: UniformSeries,
	band: Tuple[float, float] = HRV_BAND_HZ,
	order: int = 2,
	corner_scale: Tuple[float, float] = (0.75, 1.2),
	expected_fs: float = HRV_FS,
) -> UniformSeries:
	"""
	Zero-phase band-pass of a resampled interval series.

	Args:
	    series: Interval series sampled at ``expected_fs``.
	    band: Passband edges in Hz.
	    order: Butterworth prototype order (the band-pass has twice this order).
	    corner_scale: Factors applied to the band edges to place the design corners.
	    expected_fs: Required sampling frequency.

	Returns:
	    UniformSeries: Filtered series on the same time base.

	Raises:
	    InvalidSeriesError: If the series is not sampled at ``expected_fs``.
	    InsufficientDataError: If it holds less than one minute of samples.

	"""
	if abs(series.fs - expected_fs) > 1e-9:
		raise InvalidSeriesError(
			f'band-pass expects {expected_fs} Hz input, got {series.fs} Hz'
		)
	minimum = int(round(MIN_FILTER_SAMPLES * expected_fs / HRV_FS))
	if len(series) < minimum:
		raise InsufficientDataError(
			f'band-pass needs at least {minimum} samples, got {len(series)}'
		)
	sos = design_hrv_bandpass(series.fs, band, order, corner_scale)
	return series.with_values(sosfiltfilt(sos, series.values))


@dataclass(frozen=True, eq=False)
class ArState:
	"""
	Autoregressive model adapted by normalized LMS.

	Attributes:
	    coeffs: AR coefficients a1..ap.
	    history: Last p samples, most recent first.
	    mu: NLMS step size.
	    eps: Regularization added to the history energy.
	    filled: Samples seen so far, saturating at p; adaptation starts once full.

	"""

	coeffs: np.ndarray
	history: np.ndarray
	mu: float = 0.05
	eps: float = 1e-8
	filled: int = 0

	def __post_init__(self):
		coeffs = np.array(self.coeffs, dtype=np.float64).reshape(-1)
		history = np.array(self.history, dtype=np.float64).reshape(-1)
		if len(coeffs) == 0 or len(coeffs) != len(history):
			raise InvalidSeriesError(
				f'coefficient and history lengths differ ({len(coeffs)} != {len(history)})'
			)
		if not np.all(np.isfinite(coeffs)):
			raise NonFiniteInputError('AR coefficients must be finite')
		coeffs.setflags(write=False)
		history.setflags(write=False)
		object.__setattr__(self, 'coeffs', coeffs)
		object.__setattr__(self, 'history', history)

	@classmethod
	def initial(cls, order: int = AR_ORDER, mu: float = 0.05, eps: float = 1e-8) -> 'ArState':
		"""Zero coefficients and an empty history."""
		return cls(np.zeros(order), np.zeros(order), mu, eps, 0)

	@property
	def order(self) -> int:
		return len(self.coeffs)


def nlms_step(state: ArState, sample: float) -> Tuple[ArState, float]:
	"""
	Predict one sample and adapt the AR coefficients.

	``prediction = sum_k a_k x[n-k]``, ``e = x[n] - prediction`` and, once the
	history is full, ``a <- a + mu * e * h / (eps + |h|^2)``.

	Args:
	    state: Current model.
	    sample: New sample x[n].

	Returns:
	    Tuple[ArState, float]: Updated model and prediction error.

	Raises:
	    NonFiniteInputError: If the sample is NaN or infinite.

	"""
	x = float(sample)
	if not math.isfinite(x):
		raise NonFiniteInputError(f'non-finite sample {sample!r}')
	h = state.history
	error = x - float(np.dot(state.coeffs, h))
	coeffs = state.coeffs
	if state.filled >= state.order:
		coeffs = coeffs + (state.mu * error / (state.eps + float(np.dot(h, h)))) * h
	history = np.concatenate(([x], h[:-1]))
	filled = min(state.filled + 1, state.order)
	return ArState(coeffs, history, state.mu, state.eps, filled), error


def _check_grid(grid: np.ndarray, fs: float) -> float:
	if len(grid) < 2:
		raise InvalidGridError('frequency grid needs at least two points')
	if grid[0] < -1e-12 or grid[-1] > fs / 2 + 1e-12:
		raise InvalidGridError(
			f'grid [{grid[0]}, {grid[-1]}] Hz leaves [0, {fs / 2}] Hz'
		)
	steps = np.diff(grid)
	if steps[0] <= 0 or not np.allclose(steps, steps[0], rtol=1e-6, atol=1e-12):
		raise InvalidGridError('frequency grid must be uniformly increasing')
	return float(steps[0])


def ar_psd_matrix(coeffs: np.ndarray, grid: np.ndarray, fs: float = HRV_FS) -> np.ndarray:
	"""
	AR power spectra for one or many coefficient vectors.

	Args:
	    coeffs: Shape (p,) or (m, p).
	    grid: Frequencies in Hz.
	    fs: Sampling frequency of the modelled series.

	Returns:
	    np.ndarray: Shape (len(grid),) or (m, len(grid)).

	Raises:
	    SpectrumError: If any value is not finite.

	"""
	coeffs = np.asarray(coeffs, dtype=np.float64)
	lags = np.arange(1, coeffs.shape[-1] + 1)
	kernel = np.exp(-2j * np.pi * np.outer(np.asarray(grid, dtype=float), lags) / fs)
	denominator = np.abs(1.0 - coeffs @ kernel.T) ** 2
	with np.errstate(divide='ignore', invalid='ignore'):
		psd = 1.0 / denominator
	if not np.all(np.isfinite(psd)):
		raise SpectrumError('AR spectrum is not finite on the grid')
	return psd


def ar_spectrum(
	coeffs: Sequence[float], grid: Sequence[float], fs: float = HRV_FS
) -> UniformSeries:
	"""
	Power spectral density of an AR model, ``1 / |1 - sum_k a_k e^(-i2pi f k/fs)|^2``.

	The innovation variance is left out; only power ratios are used downstream.

	Args:
	    coeffs: AR coefficients a1..ap.
	    grid: Uniform frequency grid in Hz within [0, fs / 2].
	    fs: Sampling frequency of the modelled series.

	Returns:
	    UniformSeries: PSD over frequency (``t0`` first frequency, ``fs`` points per Hz).

	Raises:
	    InvalidGridError: If the grid is not uniform or leaves [0, fs / 2].
	    SpectrumError: If the spectrum is not finite.

	"""
	grid = np.asarray(grid, dtype=float)
	step = _check_grid(grid, fs)
	return UniformSeries(ar_psd_matrix(coeffs, grid, fs), 1.0 / step, grid[0])


@dataclass(frozen=True)
class RespiratoryPeak:
	"""Dominant spectral peak in the respiratory band."""

	frequency: float
	peak_power: float
	band_power: float

	@property
	def gain(self) -> float:
		"""Share of the band power in the peak, in [0, 1]."""
		if self.band_power <= 0:
			return 0.0
		return min(1.0, self.peak_power / self.band_power)


def track_respiratory_peak(
	psd: UniformSeries,
	band: Tuple[float, float] = RESP_BAND_HZ,
	half_width: float = 0.02,
) -> RespiratoryPeak:
	"""
	Locate the strongest peak in the respiratory band.

	The maximum grid point in the band (the lower frequency on ties) is refined
	with the same parabolic rule as beat times. The peak power integrates the
	PSD over ``f_peak +/- half_width``, shifted inward where it would cross a
	band edge; the band power integrates the PSD over the whole band.

	Args:
	    psd: Spectrum as returned by ar_spectrum.
	    band: Respiratory band in Hz.
	    half_width: Half width of the peak window in Hz.

	Returns:
	    RespiratoryPeak: Frequency, peak power and band power.

	Raises:
	    InvalidGridError: If fewer than two grid points fall in the band.

	"""
	freqs = psd.times
	values = psd.values
	step = 1.0 / psd.fs
	tolerance = 1e-9 * max(1.0, band[1])
	in_band = np.flatnonzero((freqs >= band[0] - tolerance) & (freqs <= band[1] + tolerance))
	if len(in_band) < 2:
		raise InvalidGridError(f'grid does not cover the band {band[0]}-{band[1]} Hz')
	first, last = in_band[0], in_band[-1]

	k = int(first + np.argmax(values[first : last + 1]))
	frequency = freqs[k]
	if 1 <= k <= len(values) - 2 and values[k] >= values[k - 1] and values[k] >= values[k + 1]:
		frequency = refine_peak_parabolic(psd, k)
	frequency = float(min(max(frequency, freqs[first]), freqs[last]))

	width = min(int(round(2 * half_width / step)), last - first)
	start = int(round((frequency - half_width - freqs[0]) / step))
	start = min(max(start, first), last - width)
	peak_power = float(trapezoid(values[start : start + width + 1], dx=step))
	band_power = float(trapezoid(values[first : last + 1], dx=step))
	return RespiratoryPeak(frequency, peak_power, band_power)


@dataclass(frozen=True)
class BreathingState:
	"""
	Current breathing-rate estimate.

	Attributes:
	    rate_min: Breaths per minute, always within the band.
	    band: Respiratory band in Hz; 0.1-0.5 Hz is 6-30 breaths per minute.

	"""

	rate_min: float = 15.0
	band: Tuple[float, float] = field(default=RESP_BAND_HZ)

	def __post_init__(self):
		low, high = 60.0 * self.band[0], 60.0 * self.band[1]
		if not low <= self.rate_min <= high:
			raise InvalidParamError(
				f'breathing rate {self.rate_min} outside [{low}, {high}] per minute'
			)


def update_breathing_rate(
	state: BreathingState, f_peak: float, gain: float, strategy: str = 'linear'
) -> BreathingState:
	"""
	Move the estimate towards the peak frequency by the learning gain.

	``linear``: ``rate + g * (60 f_peak - rate)``. ``log``: the same recursion on
	the logarithm of the rate. The result is clamped to the band.

	Args:
	    state: Current estimate.
	    f_peak: Peak frequency in Hz.
	    gain: Learning gain in [0, 1].
	    strategy: ``linear`` or ``log``.

	Returns:
	    BreathingState: The updated estimate.

	Raises:
	    InvalidGainError: If the gain is outside [0, 1].
	    ValidationError: For an unknown strategy.

	"""
	if not 0.0 <= gain <= 1.0:
		raise InvalidGainError(f'gain must lie in [0, 1], got {gain}')
	low, high = 60.0 * state.band[0], 60.0 * state.band[1]
	target = min(max(60.0 * f_peak, low), high)
	if strategy == 'linear':
		rate = state.rate_min + gain * (target - state.rate_min)
	elif strategy == 'log':
		rate = math.exp(
			math.log(state.rate_min) + gain * (math.log(target) - math.log(state.rate_min))
		)
	else:
		raise ValidationError(f'unknown breathing-rate strategy {strategy!r}')
	return BreathingState(min(max(rate, low), high), state.band)


def breathing_pipeline(
	corrected: BBISeries, params: Optional[RespirationParams] = None
) -> TimedSeries:
	"""
	Breathing-rate trace from corrected intervals.

	Args:
	    corrected: Corrected intervals spanning at least ``min_duration_s``.
	    params: Pipeline tunables; defaults when omitted.

	Returns:
	    TimedSeries: Breaths per minute every ``spectrum_step_s`` after the
	    warm-up, low confidence where the underlying interval is.

	Raises:
	    InsufficientDataError: If the intervals span less than ``min_duration_s``.

	"""
	params = params or RespirationParams()
	if len(corrected) < 2 or corrected.span_s < params.min_duration_s:
		raise InsufficientDataError(
			f'breathing rate needs {params.min_duration_s:.0f} s of intervals, '
			f'got {corrected.span_s:.0f} s'
		)
	fs = params.resample_fs
	uniform = resample_linear((corrected.onset_times, corrected.intervals_ms), fs)
	filtered = bandpass_hrv(
		uniform, params.hrv_band_hz, params.filter_order, params.filter_corner_scale, fs
	)

	step = max(1, int(round(params.spectrum_step_s * fs)))
	warmup = int(math.ceil(params.warmup_s * fs - 1e-9))
	state = ArState.initial(params.ar_order, params.nlms_mu, params.nlms_eps)
	snapshots, indices = [], []
	for n, sample in enumerate(filtered.values):
		state, _ = nlms_step(state, sample)
		if n >= warmup and n % step == 0:
			snapshots.append(state.coeffs)
			indices.append(n)
	if not snapshots:
		raise InsufficientDataError('no breathing-rate estimate after the warm-up')

	grid = np.arange(0.0, params.grid_max_hz + params.grid_step_hz / 2, params.grid_step_hz)
	grid = grid[grid <= fs / 2 + 1e-12]
	_check_grid(grid, fs)
	coeffs = np.vstack(snapshots)

	breathing = BreathingState(params.initial_rate_min, params.resp_band_hz)
	rates = np.empty(len(coeffs))
	gains = np.empty(len(coeffs))
	for start in range(0, len(coeffs), _PSD_BLOCK):
		block = ar_psd_matrix(coeffs[start : start + _PSD_BLOCK], grid, fs)
		for offset, row in enumerate(block):
			peak = track_respiratory_peak(
				UniformSeries(row, 1.0 / params.grid_step_hz, grid[0]),
				params.resp_band_hz,
				params.peak_half_width_hz,
			)
			breathing = update_breathing_rate(
				breathing, peak.frequency, peak.gain, params.br_update
			)
			rates[start + offset] = breathing.rate_min
			gains[start + offset] = peak.gain

	times = filtered.t0 + np.asarray(indices) / fs
	source = np.clip(
		np.searchsorted(corrected.onset_times, times, side='right') - 1, 0, len(corrected) - 1
	)
	logger.info(
		f'Estimated {len(rates)} breathing-rate samples, mean gain {gains.mean():.3f}'
	)
	return TimedSeries(times, rates, corrected.low_confidence[source])
