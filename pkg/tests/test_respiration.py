import numpy as np
import pytest
from scipy.signal import periodogram

from ppg_sleep.evaluation.scoring import evaluate_br
from ppg_sleep.exceptions import (
	InsufficientDataError,
	InvalidGainError,
	InvalidGridError,
	InvalidSeriesError,
	NonFiniteInputError,
)
from ppg_sleep.signals.beats import beats_to_intervals
from ppg_sleep.signals.core import UniformSeries
from ppg_sleep.signals.respiration import (
	ArState,
	BreathingState,
	RespirationParams,
	ar_spectrum,
	bandpass_hrv,
	breathing_pipeline,
	nlms_step,
	track_respiratory_peak,
	update_breathing_rate,
)
from ppg_sleep.signals.synth import gen_beat_times

FS = 2.0
GRID = np.arange(501) * 0.002


def sinusoid(freq, n=4000, amplitude=1.0):
	t = np.arange(n) / FS
	return UniformSeries(amplitude * np.sin(2 * np.pi * freq * t), FS)


def rms_gain(freq):
	x = sinusoid(freq)
	y = bandpass_hrv(x)
	inner = slice(1000, 3000)
	return np.sqrt(np.mean(y.values[inner] ** 2) / np.mean(x.values[inner] ** 2))


def train(values, order=20, mu=0.05):
	state = ArState.initial(order, mu)
	for value in values:
		state, _ = nlms_step(state, value)
	return state


def test_bandpass_rejects_dc():
	out = bandpass_hrv(UniformSeries(np.full(600, 5.0), FS))
	assert np.max(np.abs(out.values[60:-60])) < 0.05


@pytest.mark.parametrize('freq', [0.04, 0.1, 0.25, 0.5])
def test_bandpass_passband(freq):
	assert 20 * np.log10(rms_gain(freq)) > -3.0


def test_bandpass_preserves_respiratory_amplitude():
	assert rms_gain(0.25) == pytest.approx(1.0, abs=0.1)


@pytest.mark.parametrize('freq', [0.01, 0.9])
def test_bandpass_stopband(freq):
	assert 20 * np.log10(rms_gain(freq)) < -20.0


def test_bandpass_preconditions():
	with pytest.raises(InvalidSeriesError):
		bandpass_hrv(UniformSeries(np.zeros(600), 4.0))
	with pytest.raises(InsufficientDataError):
		bandpass_hrv(UniformSeries(np.zeros(100), FS))


def test_nlms_zero_input_leaves_model_unchanged():
	state = ArState.initial()
	for _ in range(100):
		state, error = nlms_step(state, 0.0)
		assert error == 0.0
	assert np.all(state.coeffs == 0.0)
	assert len(state.coeffs) == 20


def test_nlms_warm_up_fills_history_first():
	state = ArState.initial(order=3)
	for value in (1.0, 2.0, 3.0):
		state, _ = nlms_step(state, value)
	assert np.all(state.coeffs == 0.0)
	assert list(state.history) == [3.0, 2.0, 1.0]
	state, _ = nlms_step(state, 4.0)
	assert np.any(state.coeffs != 0.0)


def test_nlms_learns_ar1(rng):
	x = np.zeros(20000)
	noise = rng.normal(size=20000)
	for n in range(1, len(x)):
		x[n] = 0.9 * x[n - 1] + noise[n]
	state = ArState.initial(order=2, mu=0.01)
	a1 = []
	for value in x:
		state, _ = nlms_step(state, value)
		a1.append(state.coeffs[0])
	assert np.mean(a1[-2000:]) == pytest.approx(0.9, abs=0.05)


def test_nlms_update_norm_bound(rng):
	state = ArState.initial(order=5, mu=0.3)
	for value in rng.normal(size=500):
		h = state.history
		new, error = nlms_step(state, value)
		if state.filled >= state.order:
			step = np.linalg.norm(new.coeffs - state.coeffs)
			assert step <= state.mu * abs(error) / np.linalg.norm(h) + 1e-12
		state = new


def test_nlms_error_energy_decreases(rng):
	x = np.zeros(5000)
	noise = rng.normal(size=5000)
	for n in range(2, len(x)):
		x[n] = 1.2 * x[n - 1] - 0.5 * x[n - 2] + noise[n]
	state = ArState.initial(order=2, mu=0.1)
	errors = []
	for value in x:
		state, error = nlms_step(state, value)
		errors.append(error)
	energy = np.mean(np.square(errors).reshape(-1, 500), axis=1)
	assert energy[-1] < energy[0]


def test_nlms_rejects_non_finite():
	with pytest.raises(NonFiniteInputError):
		nlms_step(ArState.initial(), float('nan'))


def test_nlms_scale_invariance(rng):
	x = sinusoid(0.3, n=600).values + 0.1 * rng.normal(size=600)
	small = train(x)
	large = train(7.0 * x)
	np.testing.assert_allclose(small.coeffs, large.coeffs, rtol=1e-6, atol=1e-9)


def test_ar_spectrum_of_zero_model_is_flat():
	psd = ar_spectrum(np.zeros(20), GRID)
	np.testing.assert_allclose(psd.values, 1.0)
	assert psd.t0 == 0.0


def test_ar_spectrum_of_ar1_decreases():
	psd = ar_spectrum([0.9], GRID)
	assert np.argmax(psd.values) == 0
	assert np.all(np.diff(psd.values) < 0)
	assert np.all(psd.values > 0)


def test_ar_spectrum_rejects_grid_beyond_nyquist():
	with pytest.raises(InvalidGridError):
		ar_spectrum(np.zeros(20), np.arange(0.0, 1.5, 0.01))


def test_ar_spectrum_peak_matches_periodogram(rng):
	for freq in rng.uniform(0.1, 0.45, 20):
		x = sinusoid(freq, n=2000).values + 0.3 * rng.normal(size=2000)
		psd = ar_spectrum(train(x).coeffs, GRID)
		freqs, power = periodogram(x, fs=FS)
		assert abs(GRID[np.argmax(psd.values)] - freqs[np.argmax(power)]) <= 0.02
		assert GRID[np.argmax(psd.values)] == pytest.approx(freq, abs=0.02)


def test_track_flat_spectrum():
	peak = track_respiratory_peak(UniformSeries(np.ones(len(GRID)), 500.0))
	assert peak.gain == pytest.approx(0.1, abs=1e-9)
	assert 0 < peak.peak_power <= peak.band_power


def test_track_single_peak():
	width = 0.002
	psd = 1e-3 + 1.0 / (1.0 + ((GRID - 0.25) / width) ** 2)
	peak = track_respiratory_peak(UniformSeries(psd, 500.0))
	assert peak.frequency == pytest.approx(0.25, abs=0.002)
	assert peak.gain > 0.8


def test_track_tie_prefers_lower_frequency():
	psd = np.ones(len(GRID))
	for centre in (100, 175):
		psd[centre] = 10.0
		psd[centre - 1] = psd[centre + 1] = 5.0
	peak = track_respiratory_peak(UniformSeries(psd, 500.0))
	assert peak.frequency == pytest.approx(0.2, abs=1e-9)


def test_track_needs_band_coverage():
	with pytest.raises(InvalidGridError):
		track_respiratory_peak(UniformSeries(np.ones(10), 500.0))


def test_update_breathing_rate_examples():
	state = BreathingState(12.0)
	assert update_breathing_rate(state, 0.3, 0.0).rate_min == 12.0
	assert update_breathing_rate(state, 0.3, 1.0).rate_min == pytest.approx(18.0)
	assert update_breathing_rate(state, 0.3, 0.5).rate_min == pytest.approx(15.0)
	assert update_breathing_rate(state, 0.3, 1.0, 'log').rate_min == pytest.approx(18.0)


def test_update_breathing_rate_rejects_bad_gain():
	with pytest.raises(InvalidGainError):
		update_breathing_rate(BreathingState(), 0.25, 1.5)
	with pytest.raises(InvalidGainError):
		update_breathing_rate(BreathingState(), 0.25, -0.1)


def test_breathing_rate_stays_in_range(rng):
	state = BreathingState()
	for f_peak, gain in zip(rng.uniform(0.0, 1.0, 1000), rng.uniform(0.0, 1.0, 1000)):
		state = update_breathing_rate(state, f_peak, gain)
		assert 6.0 <= state.rate_min <= 30.0


@pytest.mark.parametrize('breaths', [8, 12, 15, 20, 25])
def test_breathing_pipeline_converges(breaths):
	truth = gen_beat_times(60.0, breaths / 60.0, 0.05, 600.0)
	br = breathing_pipeline(beats_to_intervals(truth.beats))
	assert br.times[0] >= 60.0
	np.testing.assert_allclose(np.diff(br.times), 1.0)
	late = br.values[br.times >= 300.0]
	assert np.median(late) == pytest.approx(breaths, abs=0.5)


@pytest.mark.slow
def test_breathing_pipeline_follows_step():
	truth = gen_beat_times(60.0, [(0.0, 0.2), (300.0, 1 / 3)], 0.05, 600.0)
	br = breathing_pipeline(beats_to_intervals(truth.beats))
	assert np.median(br.values[br.times >= 540.0]) == pytest.approx(20.0, abs=1.0)


def test_breathing_pipeline_without_rsa_stays_in_band():
	truth = gen_beat_times(60.0, 0.25, 0.0, 600.0, seed=5, jitter_std_s=0.005)
	br = breathing_pipeline(beats_to_intervals(truth.beats))
	assert np.all((br.values >= 6.0) & (br.values <= 30.0))


def test_breathing_pipeline_needs_five_minutes():
	truth = gen_beat_times(60.0, 0.25, 0.05, 200.0)
	with pytest.raises(InsufficientDataError):
		breathing_pipeline(beats_to_intervals(truth.beats))


def test_respiration_params_from_settings(settings):
	params = RespirationParams.from_settings(settings.replace(nlms_mu=0.1))
	assert params.nlms_mu == 0.1
	assert params.ar_order == 20
	assert params.resp_band_hz == (0.1, 0.5)


def test_breathing_rate_ignores_interval_deviation_scale():
	truth = gen_beat_times(62.0, 0.23, 0.05, 600.0, seed=4, jitter_std_s=0.003)
	bbi = beats_to_intervals(truth.beats)
	base = breathing_pipeline(bbi)
	mean = bbi.intervals_ms.mean()
	for scale in (0.25, 3.0):
		scaled = bbi.replace(intervals_ms=mean + scale * (bbi.intervals_ms - mean))
		rates = breathing_pipeline(scaled)
		np.testing.assert_allclose(rates.times, base.times)
		np.testing.assert_allclose(rates.values, base.values, rtol=1e-6, atol=1e-6)


@pytest.mark.slow
def test_breathing_rate_error_over_random_nights(rng):
	errors = []
	for night in range(20):
		hr = rng.uniform(50.0, 70.0)
		breaths = rng.uniform(8.0, 25.0)
		truth = gen_beat_times(hr, breaths / 60.0, 0.05, 1800.0, seed=night, jitter_std_s=0.002)
		br = breathing_pipeline(beats_to_intervals(truth.beats))
		errors.append(evaluate_br(br, truth.true_br).mae)
	assert np.median(errors) <= 1.0
