import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from crf_tuning.errors import (
    ConfigError,
    DataError,
    DegenerateBaselineError,
    DegenerateWindowError,
    IncompleteRecordingError,
)
from crf_tuning.preprocess import (
    DEFAULT_CONTRASTS,
    PreprocessConfig,
    RawRecording,
    Trial,
    TuningCurve,
    band_power,
    build_tuning_curve,
    butterworth_lowpass,
    periodogram,
    snr_from_powers,
    snr_response,
    stationarity_flag,
)
from crf_tuning.synth import SynthSpec, gen_curves, gen_raw

FS = 1000.0


def _sine(freq, amp=1.0, n=2000, fs=FS, phase=0.0):
    t = np.arange(n) / fs
    return amp * np.sin(2 * np.pi * freq * t + phase)


def _steady_gain_db(freq, cutoff=100.0, fs=FS):
    x = _sine(freq, n=int(4 * fs), fs=fs)
    y = butterworth_lowpass(x, fs, cutoff)
    half = x.size // 2  # skip the transient
    return 20 * np.log10(np.sqrt(np.mean(y[half:] ** 2)) / np.sqrt(np.mean(x[half:] ** 2)))


# ---------------------------------------------------------------------------
# Butterworth
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("cutoff", [20.0, 100.0, 300.0])
def test_dc_gain_is_unity(cutoff):
    y = butterworth_lowpass(np.full(5000, 3.0), FS, cutoff)
    assert abs(y[-1] - 3.0) < 1e-9


def test_minus_three_db_at_cutoff():
    assert abs(_steady_gain_db(100.0) - (-3.01)) < 0.5


def test_forty_db_per_decade():
    # 10x of a 40 Hz cutoff stays well below Nyquist, where prewarping is negligible
    assert abs(_steady_gain_db(400.0, cutoff=40.0, fs=5000.0) - (-40.0)) < 2.0


def test_length_preserved_and_causal():
    x = np.zeros(100)
    x[50] = 1.0
    y = butterworth_lowpass(x, FS, 100.0)
    assert y.size == 100
    np.testing.assert_array_equal(y[:50], 0.0)


def test_filter_errors():
    with pytest.raises(ConfigError):
        butterworth_lowpass(np.ones(10), FS, 500.0)
    with pytest.raises(ConfigError):
        butterworth_lowpass(np.ones(10), FS, 0.0)
    with pytest.raises(DataError):
        butterworth_lowpass([1.0, np.nan], FS, 100.0)
    with pytest.raises(DataError):
        butterworth_lowpass([], FS, 100.0)


# ---------------------------------------------------------------------------
# spectra
# ---------------------------------------------------------------------------


def test_periodogram_parseval():
    x = np.random.default_rng(0).normal(size=999)
    freqs, psd = periodogram(x, FS)
    assert psd.sum() * FS / x.size == pytest.approx(np.mean(x ** 2), rel=1e-12)


def _total_power(x):
    freqs, psd = periodogram(x, FS)
    return psd.sum()


def _band_total(x, band=(30.0, 90.0)):
    freqs, psd = periodogram(x, FS)
    return psd[(freqs >= band[0]) & (freqs <= band[1])].sum()


def test_in_band_tone_captured():
    x = _sine(60.0)
    assert _band_total(x) >= 0.95 * _total_power(x)
    assert band_power(x, FS) > 0


def test_out_of_band_tone_rejected():
    x = _sine(120.0)
    assert _band_total(x) <= 0.01 * _total_power(x)


def test_amplitude_two_tone_is_four_times():
    ref = band_power(_sine(60.0), FS)
    mixed = band_power(_sine(60.0, 2.0) + _sine(120.0), FS)
    assert mixed / ref == pytest.approx(4.0, rel=0.05)


@given(st.floats(0, 2 * np.pi), st.floats(0.1, 5.0))
def test_out_of_band_tone_invariance(phase, amp):
    noise = np.random.default_rng(1).normal(size=2000) + _sine(45.0)
    base = band_power(noise, FS)
    assert abs(band_power(noise + _sine(150.0, amp, phase=phase), FS) / base - 1) < 0.02


def test_band_edges_inclusive():
    x = np.random.default_rng(2).normal(size=1000)  # 1 Hz bins: 30..90 gives 61 bins
    freqs, psd = periodogram(x, FS)
    assert band_power(x, FS, (30.0, 90.0)) == pytest.approx(psd[30:91].mean(), rel=1e-14)


def test_band_power_window_errors():
    x = np.ones(100)
    with pytest.raises(DegenerateWindowError):
        band_power(x, FS, window=(50, 50))
    with pytest.raises(DegenerateWindowError):
        band_power(x, FS, window=(0, 200))
    with pytest.raises(DegenerateWindowError):
        band_power(x, FS, band=(31.0, 32.0), window=(0, 10))  # 100 Hz bins
    with pytest.raises(ConfigError):
        band_power(x, FS, band=(30.0, 600.0))


def test_band_power_length_independent_for_noise():
    rng = np.random.default_rng(3)
    short = np.mean([band_power(rng.normal(size=200), FS) for _ in range(400)])
    long = np.mean([band_power(rng.normal(size=2000), FS) for _ in range(40)])
    assert short == pytest.approx(2.0 / FS, rel=0.05)
    assert long == pytest.approx(2.0 / FS, rel=0.05)


# ---------------------------------------------------------------------------
# SNR
# ---------------------------------------------------------------------------


def _trial_pair(stim, base):
    return Trial(0.1, np.concatenate([base, stim]), base.size)


def test_snr_identical_windows_is_one():
    rng = np.random.default_rng(4)
    trials = []
    for _ in range(5):
        seg = rng.normal(size=200)
        trials.append(_trial_pair(seg, seg))
    assert snr_response(trials, (0, 200), (-200, 0), sample_rate=FS) == pytest.approx(1.0, rel=1e-12)


def test_snr_exact_double():
    rng = np.random.default_rng(5)
    trials = []
    for _ in range(4):
        seg = rng.normal(size=200)
        trials.append(_trial_pair(np.sqrt(2) * seg, seg))
    assert snr_response(trials, (0, 200), (-200, 0), sample_rate=FS) == pytest.approx(2.0, rel=1e-12)


def test_snr_of_means_hand_value():
    assert snr_from_powers([2, 4, 6], [1, 1, 2]) == pytest.approx(3.0, abs=1e-15)


def test_zero_baseline_raises():
    with pytest.raises(DegenerateBaselineError):
        snr_from_powers([1.0], [0.0])
    t = _trial_pair(_sine(60.0, n=200), np.zeros(200))
    with pytest.raises(DegenerateBaselineError):
        snr_response([t], (0, 200), (-200, 0), sample_rate=FS)


@given(st.floats(1e-3, 1e3))
def test_snr_scale_invariant(lam):
    rng = np.random.default_rng(6)
    trials = [Trial(0.2, rng.normal(size=600) + _sine(60.0, 2.0, n=600), 200) for _ in range(3)]
    scaled = [Trial(t.contrast, lam * t.samples, t.onset_index) for t in trials]
    a = snr_response(trials, (0, 400), (-200, 0), sample_rate=FS)
    b = snr_response(scaled, (0, 400), (-200, 0), sample_rate=FS)
    assert abs(a - b) <= 1e-9 * a


def test_window_outside_trial():
    t = Trial(0.0, np.ones(300), 100)
    with pytest.raises(DegenerateWindowError):
        snr_response([t], (0, 500), (-100, 0), sample_rate=FS)


# ---------------------------------------------------------------------------
# tuning curves
# ---------------------------------------------------------------------------


def _flat_recording(rng, n_trials=3, missing=None):
    trials = []
    for c in DEFAULT_CONTRASTS:
        if missing is not None and c == missing:
            continue
        for _ in range(n_trials):
            seg = rng.normal(size=200)
            trials.append(Trial(c, np.concatenate([rng.normal(size=100), seg, np.tile(seg, 10)]), 300))
    return RawRecording("s1", FS, trials)


def test_identical_content_gives_unit_curve():
    # a 100 ms periodic signal, filtered to steady state, gives identical
    # baseline and stimulus windows at every contrast
    n = 1500
    base = _sine(40.0, 1.0, n) + _sine(50.0, 0.5, n, phase=1.0) + _sine(70.0, 0.8, n, phase=2.0)
    trials = [Trial(c, base, 1300) for c in DEFAULT_CONTRASTS for _ in range(2)]
    cfg = PreprocessConfig(baseline_mode="per_contrast", stimulus_window_ms=(0.0, 200.0))
    curve = build_tuning_curve(RawRecording("s1", FS, trials), cfg)
    np.testing.assert_allclose(curve.responses, 1.0, rtol=1e-9)
    pooled = build_tuning_curve(RawRecording("s1", FS, trials),
                                PreprocessConfig(stimulus_window_ms=(0.0, 200.0)))
    np.testing.assert_allclose(pooled.responses, 1.0, rtol=1e-9)


def test_missing_contrast_is_incomplete():
    rec = _flat_recording(np.random.default_rng(9), missing=0.38)
    with pytest.raises(IncompleteRecordingError):
        build_tuning_curve(rec)


def test_stray_contrast_rejected():
    rec = _flat_recording(np.random.default_rng(10))
    rec.trials.append(Trial(0.5, np.zeros(2500), 300))
    with pytest.raises(DataError):
        build_tuning_curve(rec)


def test_injected_supersaturating_shape_recovered():
    spec = SynthSpec("supersaturating", (3.0, 0.3, 2.0, 1.0, 1.4), noise_sd=0.0)
    curve = gen_curves(spec)[0]
    rec = gen_raw(curve, seed=3)
    got = build_tuning_curve(rec)
    rho = stats.spearmanr(got.responses, curve.truth).statistic
    assert rho >= 0.95
    k = int(np.argmax(got.responses))
    assert 0 < k < 7


def test_curve_contrasts_strictly_increasing():
    curve = gen_curves(SynthSpec("saturating", noise_sd=0.0))[0]
    got = build_tuning_curve(gen_raw(curve))
    assert got.contrasts.size == 8
    assert np.all(np.diff(got.contrasts) > 0)
    assert got.trial_counts == (20,) * 8


def test_tuning_curve_validation():
    with pytest.raises(DataError):
        TuningCurve("x", DEFAULT_CONTRASTS[:7], np.ones(7))
    with pytest.raises(DataError):
        TuningCurve("x", DEFAULT_CONTRASTS, -np.ones(8))
    with pytest.raises(DataError):
        TuningCurve("x", DEFAULT_CONTRASTS[::-1], np.ones(8))


def test_config_validation():
    with pytest.raises(ConfigError):
        PreprocessConfig(contrasts=(0.0, 0.1))
    with pytest.raises(ConfigError):
        PreprocessConfig(baseline_mode="median")
    with pytest.raises(ConfigError):
        PreprocessConfig(stimulus_window_ms=(100.0, 0.0))


# ---------------------------------------------------------------------------
# stationarity
# ---------------------------------------------------------------------------


def test_white_noise_is_stationary():
    rng = np.random.default_rng(11)
    flags = [stationarity_flag(rng.normal(size=2000)).stationary for _ in range(50)]
    assert sum(flags) >= 48


def test_filtered_noise_is_stationary():
    rng = np.random.default_rng(12)
    flags = [stationarity_flag(butterworth_lowpass(rng.normal(size=3000), FS, 100.0)[500:]).stationary
             for _ in range(50)]
    assert sum(flags) >= 45


def test_ramp_is_not_stationary():
    x = np.linspace(0, 100, 2000) + np.random.default_rng(13).normal(size=2000)
    rep = stationarity_flag(x)
    assert not rep.stationary
    assert rep.max_mean_z > 3


def test_variance_step_is_not_stationary():
    rng = np.random.default_rng(14)
    x = np.concatenate([rng.normal(size=1000), rng.normal(0, np.sqrt(10), 1000)])
    rep = stationarity_flag(x)
    assert not rep.stationary
    assert rep.variance_ratio > 4


def test_stationarity_never_raises():
    assert stationarity_flag([1.0]).stationary is False
    assert stationarity_flag([np.nan] * 20).stationary is False
    assert stationarity_flag(np.zeros(40)).stationary is True
    assert len(stationarity_flag(np.arange(40.0), n_segments=1).segment_means) == 2
