"""Raw LFP traces to gamma-band SNR contrast tuning curves.

Pipeline per recording site and contrast: second-order Butterworth
low-pass, rectangular-window periodogram, mean one-sided power spectral
density over the gamma bins, and the ratio of trial-averaged stimulus
power to trial-averaged pre-stimulus baseline power.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import signal

from .errors import (
    ConfigError,
    DataError,
    DegenerateBaselineError,
    DegenerateWindowError,
    IncompleteRecordingError,
)

__all__ = [
    "DEFAULT_CONTRASTS",
    "GAMMA_BAND",
    "Trial",
    "RawRecording",
    "TuningCurve",
    "PreprocessConfig",
    "StationarityReport",
    "butterworth_lowpass",
    "periodogram",
    "band_power",
    "snr_from_powers",
    "snr_response",
    "build_tuning_curve",
    "stationarity_flag",
]

DEFAULT_CONTRASTS = (0.0, 0.02, 0.04, 0.09, 0.19, 0.38, 0.57, 0.76)
GAMMA_BAND = (30.0, 90.0)
N_CONTRASTS = 8
CONTRAST_ATOL = 1e-9


@dataclass
class Trial:
    contrast: float
    samples: np.ndarray
    onset_index: int

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=float).reshape(-1)
        self.contrast = float(self.contrast)
        self.onset_index = int(self.onset_index)
        if not 0.0 <= self.contrast <= 1.0:
            raise DataError(f"contrast {self.contrast} outside [0, 1]")
        if not np.all(np.isfinite(self.samples)):
            raise DataError("trial contains non-finite samples")
        if not 0 <= self.onset_index <= self.samples.size:
            raise DataError(f"onset_index {self.onset_index} outside trial of {self.samples.size} samples")


@dataclass
class RawRecording:
    site_id: str
    sample_rate: float
    trials: list[Trial] = field(default_factory=list)

    def __post_init__(self):
        self.sample_rate = float(self.sample_rate)
        if not self.sample_rate > 2 * GAMMA_BAND[1]:
            raise DataError(f"sample_rate {self.sample_rate} Hz cannot resolve the gamma band")

    def trials_at(self, contrast: float) -> list[Trial]:
        return [t for t in self.trials if abs(t.contrast - contrast) <= CONTRAST_ATOL]

    def contrasts(self) -> list[float]:
        return sorted({t.contrast for t in self.trials})


@dataclass
class TuningCurve:
    """Eight (contrast, SNR response) points for one recording site.

    ``label`` and ``truth`` are only set for synthetic curves, where they
    carry the generating class and the noise-free responses.
    """

    site_id: str
    contrasts: np.ndarray
    responses: np.ndarray
    trial_counts: tuple[int, ...] = ()
    label: str | None = None
    truth: np.ndarray | None = None

    def __post_init__(self):
        self.site_id = str(self.site_id)
        self.contrasts = np.asarray(self.contrasts, dtype=float).reshape(-1)
        self.responses = np.asarray(self.responses, dtype=float).reshape(-1)
        if self.contrasts.size != N_CONTRASTS or self.responses.size != N_CONTRASTS:
            raise DataError(f"site {self.site_id}: a tuning curve needs exactly {N_CONTRASTS} points")
        if np.any(np.diff(self.contrasts) <= 0):
            raise DataError(f"site {self.site_id}: contrasts must be strictly increasing")
        if self.contrasts[0] != 0.0:
            raise DataError(f"site {self.site_id}: first contrast must be 0")
        if not np.all(np.isfinite(self.responses)) or np.any(self.responses <= 0):
            raise DataError(f"site {self.site_id}: responses must be finite and positive")
        if not self.trial_counts:
            self.trial_counts = (0,) * N_CONTRASTS
        self.trial_counts = tuple(int(n) for n in self.trial_counts)
        if self.truth is not None:
            self.truth = np.asarray(self.truth, dtype=float).reshape(-1)

    def __len__(self):
        return self.contrasts.size


@dataclass(frozen=True)
class PreprocessConfig:
    """Settings for :func:`build_tuning_curve`.

    Windows are in milliseconds relative to stimulus onset.  With the
    default ``baseline_mode="pooled"`` the baseline power of every trial of
    the site is averaged once and shared by all contrasts; a 200 ms baseline
    holds only 13 gamma bins, so per-contrast baselines
    (``"per_contrast"``) are several times noisier.
    """

    contrasts: tuple[float, ...] = DEFAULT_CONTRASTS
    cutoff_hz: float = 100.0
    zero_phase: bool = False
    band: tuple[float, float] = GAMMA_BAND
    stimulus_window_ms: tuple[float, float] = (0.0, 2000.0)
    baseline_window_ms: tuple[float, float] = (-200.0, 0.0)
    baseline_mode: str = "pooled"

    def __post_init__(self):
        c = tuple(float(x) for x in self.contrasts)
        object.__setattr__(self, "contrasts", c)
        if len(c) != N_CONTRASTS or any(b <= a for a, b in zip(c, c[1:])) or c[0] != 0.0:
            raise ConfigError("contrast grid must be 8 strictly increasing values starting at 0")
        lo, hi = self.band
        if not 0 <= lo < hi:
            raise ConfigError("band must satisfy 0 <= low < high")
        if self.baseline_mode not in ("per_contrast", "pooled"):
            raise ConfigError("baseline_mode must be 'per_contrast' or 'pooled'")
        for name in ("stimulus_window_ms", "baseline_window_ms"):
            a, b = getattr(self, name)
            if not b > a:
                raise ConfigError(f"{name} must have end > start")


# ---------------------------------------------------------------------------
# Signal operations
# ---------------------------------------------------------------------------


def butterworth_lowpass(samples, sample_rate: float, cutoff: float = 100.0, *,
                        zero_phase: bool = False) -> np.ndarray:
    """Second-order Butterworth low-pass (bilinear transform, prewarped).

    Applied as a single causal pass unless ``zero_phase`` requests a
    forward-backward pass.
    """
    x = np.asarray(samples, dtype=float).reshape(-1)
    if x.size == 0:
        raise DataError("samples must be non-empty")
    if not 0 < cutoff < sample_rate / 2:
        raise ConfigError(f"cutoff {cutoff} Hz must lie in (0, {sample_rate / 2}) Hz")
    if not np.all(np.isfinite(x)):
        raise DataError("samples contain non-finite values")
    b, a = signal.butter(2, cutoff, btype="low", fs=sample_rate)
    if zero_phase:
        return signal.filtfilt(b, a, x)
    return signal.lfilter(b, a, x)


def periodogram(segment, sample_rate: float) -> tuple[np.ndarray, np.ndarray]:
    """One-sided power spectral density of a rectangular-windowed segment.

    Integrating the returned density over frequency (sum times ``fs / N``)
    gives the segment's mean square.
    """
    x = np.asarray(segment, dtype=float).reshape(-1)
    n = x.size
    spec = np.fft.rfft(x)
    psd = (np.abs(spec) ** 2) / (n * sample_rate)
    if n % 2 == 0:
        psd[1:-1] *= 2.0
    else:
        psd[1:] *= 2.0
    return np.fft.rfftfreq(n, 1.0 / sample_rate), psd


def band_power(samples, sample_rate: float, band: tuple[float, float] = GAMMA_BAND,
               window: tuple[int, int] | None = None) -> float:
    """Mean PSD over bins with ``low <= f <= high`` inside ``samples[start:end]``.

    Averaging a density (rather than summing raw periodogram bins) makes the
    value independent of window length, so a 200 ms baseline and a 2 s
    stimulus window of the same noise give the same power.
    """
    x = np.asarray(samples, dtype=float).reshape(-1)
    start, end = window if window is not None else (0, x.size)
    if start < 0 or end > x.size or end <= start:
        raise DegenerateWindowError(f"window [{start}, {end}) invalid for {x.size} samples")
    low, high = band
    if not low < high < sample_rate / 2:
        raise ConfigError(f"band {band} must satisfy low < high < Nyquist")
    freqs, psd = periodogram(x[start:end], sample_rate)
    sel = (freqs >= low) & (freqs <= high)
    if not np.any(sel):
        raise DegenerateWindowError(f"no FFT bin falls in {band} Hz for a {end - start}-sample window")
    return float(psd[sel].mean())


def _window_indices(trial: Trial, window_ms, sample_rate):
    start = trial.onset_index + int(round(window_ms[0] * sample_rate / 1000.0))
    end = trial.onset_index + int(round(window_ms[1] * sample_rate / 1000.0))
    if start < 0 or end > trial.samples.size or end <= start:
        raise DegenerateWindowError(
            f"window {window_ms} ms around onset {trial.onset_index} exceeds {trial.samples.size} samples")
    return start, end


def snr_from_powers(stimulus_powers: Sequence[float], baseline_powers: Sequence[float]) -> float:
    """Ratio of the trial-mean stimulus power to the trial-mean baseline power."""
    s = np.asarray(stimulus_powers, dtype=float)
    b = np.asarray(baseline_powers, dtype=float)
    if s.size == 0 or b.size == 0:
        raise DataError("need at least one trial")
    denom = b.mean()
    if denom <= 0:
        raise DegenerateBaselineError("baseline band power is zero")
    return float(s.mean() / denom)


def trial_powers(trials: Sequence[Trial], window_ms, band, sample_rate) -> np.ndarray:
    return np.array([band_power(t.samples, sample_rate, band, _window_indices(t, window_ms, sample_rate))
                     for t in trials])


def snr_response(trials_at_contrast: Sequence[Trial], stimulus_window=(0.0, 2000.0),
                 baseline_window=(-200.0, 0.0), band=GAMMA_BAND, sample_rate: float = 5000.0) -> float:
    """SNR response of one contrast level.

    Windows are ``(start_ms, end_ms)`` relative to each trial's onset.
    """
    if len(trials_at_contrast) == 0:
        raise DataError("need at least one trial")
    stim = trial_powers(trials_at_contrast, stimulus_window, band, sample_rate)
    base = trial_powers(trials_at_contrast, baseline_window, band, sample_rate)
    return snr_from_powers(stim, base)


def _filtered(trials, sample_rate, config):
    return [Trial(t.contrast, butterworth_lowpass(t.samples, sample_rate, config.cutoff_hz,
                                                  zero_phase=config.zero_phase), t.onset_index)
            for t in trials]


def build_tuning_curve(rec: RawRecording, config: PreprocessConfig | None = None) -> TuningCurve:
    """Filter every trial and compute the SNR response at each configured contrast."""
    config = config or PreprocessConfig()
    groups = []
    for c in config.contrasts:
        trials = rec.trials_at(c)
        if not trials:
            raise IncompleteRecordingError(f"site {rec.site_id}: no trials at contrast {c}")
        groups.append(_filtered(trials, rec.sample_rate, config))
    known = set()
    for c in config.contrasts:
        known.update(id(t) for t in rec.trials_at(c))
    stray = [t.contrast for t in rec.trials if id(t) not in known]
    if stray:
        raise DataError(f"site {rec.site_id}: trials at unconfigured contrasts {sorted(set(stray))}")

    fs = rec.sample_rate
    responses = []
    if config.baseline_mode == "pooled":
        base = np.concatenate([trial_powers(g, config.baseline_window_ms, config.band, fs) for g in groups])
        for g in groups:
            stim = trial_powers(g, config.stimulus_window_ms, config.band, fs)
            responses.append(snr_from_powers(stim, base))
    else:
        for g in groups:
            responses.append(snr_response(g, config.stimulus_window_ms, config.baseline_window_ms,
                                          config.band, fs))
    return TuningCurve(rec.site_id, np.array(config.contrasts), np.array(responses),
                       tuple(len(g) for g in groups))


# ---------------------------------------------------------------------------
# Stationarity heuristic
# ---------------------------------------------------------------------------


@dataclass
class StationarityReport:
    stationary: bool
    segment_means: list[float]
    segment_variances: list[float]
    max_mean_z: float
    variance_ratio: float


def stationarity_flag(samples, n_segments: int = 4, *, z_limit: float = 3.0,
                      ratio_limit: float = 4.0) -> StationarityReport:
    """Heuristic weak-stationarity check; advisory only, never raises.

    Splits the trace into equal segments and fails if a segment mean sits
    more than ``z_limit`` pooled standard errors from the grand mean or the
    largest/smallest segment variance ratio exceeds ``ratio_limit``.

    Filtered traces are serially correlated, so the standard error uses an
    effective segment length ``n (1 - r) / (1 + r)`` with ``r`` the pooled
    lag-1 autocorrelation of the within-segment deviations (clipped to
    ``[0, 1)``; white noise keeps ``n``).
    """
    x = np.asarray(samples, dtype=float).reshape(-1)
    n_segments = max(int(n_segments), 2)
    if x.size < 2 * n_segments or not np.all(np.isfinite(x)):
        return StationarityReport(False, [], [], float("nan"), float("nan"))
    segs = np.array_split(x, n_segments)
    means = np.array([s.mean() for s in segs])
    var = np.array([s.var(ddof=1) for s in segs])
    seg_len = np.array([s.size for s in segs])
    pooled_var = float(np.sum((seg_len - 1) * var) / np.sum(seg_len - 1))
    grand = float(x.mean())
    if pooled_var <= 0:
        z = 0.0 if np.all(means == grand) else float("inf")
        ratio = 1.0
    else:
        dev = [sg - m for sg, m in zip(segs, means)]
        num = sum(float(np.dot(d[1:], d[:-1])) for d in dev)
        den = sum(float(np.dot(d, d)) for d in dev)
        r = min(max(num / den, 0.0), 1.0 - 1e-12) if den > 0 else 0.0
        n_eff = np.maximum(seg_len * (1.0 - r) / (1.0 + r), 1.0)
        z = float(np.max(np.abs(means - grand) / np.sqrt(pooled_var / n_eff)))
        ratio = float(var.max() / var.min()) if var.min() > 0 else float("inf")
    ok = z <= z_limit and ratio <= ratio_limit
    return StationarityReport(bool(ok), means.tolist(), var.tolist(), z, ratio)
