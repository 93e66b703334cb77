"""Ground-truth synthetic tuning curves and raw LFP recordings.

Curves are drawn from the linear, Naka-Rushton and modified Naka-Rushton
models on the 8-contrast grid with seeded Gaussian noise in SNR units.  Raw
recordings embed a gamma-band tone in white noise, scaled so that the
expected gamma SNR equals the true curve at every contrast.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Any

import numpy as np
from scipy import signal

from .errors import ConfigError, SynthSpecError
from .models import KernelModel, Kind, normalize_input
from .preprocess import (
    DEFAULT_CONTRASTS,
    GAMMA_BAND,
    PreprocessConfig,
    RawRecording,
    Trial,
    TuningCurve,
)

LINEAR = "linear"
SATURATING = "saturating"
SUPERSATURATING = "supersaturating"
CLASSES = (LINEAR, SATURATING, SUPERSATURATING)

_GENERATOR = {
    LINEAR: Kind.LINEAR,
    SATURATING: Kind.NAKA_RUSHTON,
    SUPERSATURATING: Kind.MODIFIED_NAKA_RUSHTON,
}

# Parameters live on the normalized contrast axis (0.76 -> 1).
DEFAULT_PARAMS = {
    LINEAR: (1.6, 1.0),
    SATURATING: (2.0, 0.25, 2.0, 1.0),
    SUPERSATURATING: (2.0, 0.3, 2.0, 1.0, 1.3),
}

CLAMP_FLOOR = 1e-3


@dataclass(frozen=True)
class SynthSpec:
    """Recipe for a batch of synthetic tuning curves.

    ``param_jitter`` is the log-normal spread applied per curve to every
    positive parameter (to ``s - 1`` for the suppressive exponent), giving a
    heterogeneous population around ``true_params``.  With
    ``enforce_class`` the noise draw of a curve is repeated until its
    monotonicity class matches ``kind``.
    """

    kind: str = SUPERSATURATING
    true_params: tuple[float, ...] | None = None
    noise_sd: float = 0.0
    n_curves: int = 1
    seed: int = 0
    param_jitter: float = 0.0
    contrasts: tuple[float, ...] = DEFAULT_CONTRASTS
    enforce_class: bool = False
    site_prefix: str | None = None

    def __post_init__(self):
        if self.kind not in CLASSES:
            raise SynthSpecError(f"kind must be one of {CLASSES}, got {self.kind!r}")
        if self.noise_sd < 0:
            raise SynthSpecError("noise_sd must be >= 0")
        if self.n_curves < 0:
            raise SynthSpecError("n_curves must be >= 0")
        if self.param_jitter < 0:
            raise SynthSpecError("param_jitter must be >= 0")
        params = tuple(float(p) for p in (self.true_params or DEFAULT_PARAMS[self.kind]))
        object.__setattr__(self, "true_params", params)
        object.__setattr__(self, "contrasts", tuple(float(c) for c in self.contrasts))
        model = self.model(params)
        if self.kind == SUPERSATURATING:
            if params[4] <= 1:
                raise SynthSpecError("supersaturating specs need s > 1")
            if not _interior_peak(model, self.phi):
                raise SynthSpecError("supersaturating truth must peak inside the contrast grid")

    @property
    def phi(self) -> np.ndarray:
        return normalize_input(self.contrasts, self.contrasts[0], self.contrasts[-1]).value

    def model(self, params=None) -> KernelModel:
        return KernelModel(_GENERATOR[self.kind], params if params is not None else self.true_params,
                           input_range=(self.contrasts[0], self.contrasts[-1]))

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind, "true_params": list(self.true_params), "noise_sd": self.noise_sd,
            "n_curves": self.n_curves, "seed": self.seed, "param_jitter": self.param_jitter,
            "contrasts": list(self.contrasts), "enforce_class": self.enforce_class,
            "site_prefix": self.site_prefix,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "SynthSpec":
        known = set(cls.__dataclass_fields__)
        extra = set(d) - known
        if extra:
            raise SynthSpecError(f"unknown SynthSpec keys: {sorted(extra)}")
        d = dict(d)
        for key in ("true_params", "contrasts"):
            if d.get(key) is not None:
                d[key] = tuple(d[key])
        return cls(**d)


def _interior_peak(model, phi) -> bool:
    y = model(phi)
    k = int(np.argmax(y))
    return 0 < k < len(phi) - 1


def _mi_class(y) -> str:
    r0, rm, r100 = y[0], y.max(), y[-1]
    if rm == r0:
        return "flat"
    mi = 1.0 - (rm - r100) / (rm - r0)
    return SUPERSATURATING if mi < 1.0 - 1e-9 else "monotone"


_BASELINE_INDEX = {LINEAR: 1, SATURATING: 3, SUPERSATURATING: 3}


def _peak_amplitude(spec: SynthSpec, theta) -> float:
    y = spec.model(theta)(spec.phi)
    return float(y.max() - theta[_BASELINE_INDEX[spec.kind]])


def _jitter_params(spec: SynthSpec, rng) -> np.ndarray:
    """Draw one curve's parameters around ``true_params``.

    Shape parameters get log-normal jitter; the gain (index 0) is then
    rescaled so the peak rise above baseline is the nominal rise times its
    own log-normal factor, which keeps extreme shape draws from producing
    extreme amplitudes.  The baseline gets a quarter of the spread, applied
    upward only.
    """
    base = np.array(spec.true_params, float)
    if spec.param_jitter == 0:
        return base
    ib = _BASELINE_INDEX[spec.kind]
    nominal = _peak_amplitude(spec, base)
    for _ in range(100):
        mult = np.exp(rng.normal(0.0, spec.param_jitter, base.size))
        theta = base * mult
        # upward only: an SNR baseline below its nominal value (1 = no change
        # from pre-stimulus power) could not be synthesized as raw traces
        theta[ib] = base[ib] * np.exp(abs(rng.normal(0.0, spec.param_jitter / 4)))
        if spec.kind == SUPERSATURATING:
            theta[4] = 1.0 + (base[4] - 1.0) * mult[4]
            if not _interior_peak(spec.model(theta), spec.phi):
                continue
        amp = _peak_amplitude(spec, theta)
        if amp <= 0:
            continue
        theta[0] *= nominal * mult[0] / amp
        return theta
    raise SynthSpecError("could not draw jittered parameters with an interior peak")


def gen_curves(spec: SynthSpec) -> list[TuningCurve]:
    """Evaluate the truth on the grid, add seeded noise and clamp to > 0."""
    rng = np.random.default_rng(spec.seed)
    phi = spec.phi
    prefix = spec.site_prefix or spec.kind[:3]
    curves = []
    for i in range(spec.n_curves):
        theta = _jitter_params(spec, rng)
        truth = spec.model(theta)(phi)
        want = SUPERSATURATING if spec.kind == SUPERSATURATING else "monotone"
        for _ in range(1000):
            noisy = truth + rng.normal(0.0, spec.noise_sd, phi.size) if spec.noise_sd > 0 else truth.copy()
            clamped = noisy <= 0
            noisy = np.where(clamped, CLAMP_FLOOR, noisy)
            if not spec.enforce_class or _mi_class(noisy) == want:
                break
        else:
            raise SynthSpecError(f"noise_sd={spec.noise_sd} too large to keep curve {i} in class {want}")
        if clamped.sum() > phi.size // 2:
            raise SynthSpecError(f"noise_sd={spec.noise_sd} clamps {clamped.sum()} of {phi.size} points")
        curve = TuningCurve(f"{prefix}{i:03d}", np.array(spec.contrasts), noisy, (0,) * phi.size,
                            label=spec.kind, truth=truth)
        curve.true_params = theta  # type: ignore[attr-defined]
        curves.append(curve)
    return curves


# ---------------------------------------------------------------------------
# Default corpus
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CorpusSpec:
    """The default 66-site corpus: 28 supersaturating, 19 saturating, 19 linear."""

    n_supersaturating: int = 28
    n_saturating: int = 19
    n_linear: int = 19
    noise_sd: float = 0.15
    param_jitter: float = 0.3
    seed: int = 0
    contrasts: tuple[float, ...] = DEFAULT_CONTRASTS

    def specs(self) -> list[SynthSpec]:
        # distinct, reproducible sub-seeds per class
        seeds = np.random.SeedSequence(self.seed).spawn(3)
        sub = [int(s.generate_state(1)[0]) for s in seeds]
        common = dict(noise_sd=self.noise_sd, param_jitter=self.param_jitter,
                      contrasts=self.contrasts, enforce_class=True)
        return [
            SynthSpec(SUPERSATURATING, n_curves=self.n_supersaturating, seed=sub[0], site_prefix="sup", **common),
            SynthSpec(SATURATING, n_curves=self.n_saturating, seed=sub[1], site_prefix="sat", **common),
            SynthSpec(LINEAR, n_curves=self.n_linear, seed=sub[2], site_prefix="lin", **common),
        ]

    def to_dict(self):
        return {k: (list(v) if isinstance(v, tuple) else v) for k, v in self.__dict__.items()}


def default_corpus(seed: int = 0, **overrides) -> list[TuningCurve]:
    spec = CorpusSpec(seed=seed, **overrides)
    curves: list[TuningCurve] = []
    for s in spec.specs():
        curves.extend(gen_curves(s))
    return curves


# ---------------------------------------------------------------------------
# Raw recordings
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TrialLayout:
    """Timing of each synthetic trial (milliseconds).

    ``settle_ms`` of noise precede the baseline window so the causal filter
    transient has decayed before any analysed sample.
    """

    n_trials: int = 20
    settle_ms: float = 100.0
    baseline_ms: float = 200.0
    stimulus_ms: float = 2000.0
    noise_sd: float = 1.0

    def __post_init__(self):
        if self.baseline_ms < 200.0:
            raise ConfigError("layout must provide at least 200 ms of baseline")
        if self.n_trials < 1:
            raise ConfigError("n_trials must be >= 1")


def _mean_power_gain(n_samples, sample_rate, band, b, a, passes):
    freqs = np.fft.rfftfreq(n_samples, 1.0 / sample_rate)
    sel = (freqs >= band[0]) & (freqs <= band[1])
    _, h = signal.freqz(b, a, worN=freqs[sel], fs=sample_rate)
    return float(np.mean(np.abs(h) ** (2 * passes))), int(sel.sum())


def tone_amplitudes(responses, layout: TrialLayout, carrier: float, sample_rate: float,
                    config: PreprocessConfig | None = None) -> np.ndarray:
    """Tone amplitudes whose expected gamma SNR equals ``responses``.

    With white noise of variance ``v`` the expected mean PSD over a window's
    gamma bins is ``2 v / fs * mean|H|^2``; an on-bin tone of amplitude A in
    an N-sample stimulus window adds ``A^2 N |H(f)|^2 / (2 fs K)`` where K is
    the window's in-band bin count.
    """
    config = config or PreprocessConfig()
    b, a = signal.butter(2, config.cutoff_hz, btype="low", fs=sample_rate)
    passes = 2 if config.zero_phase else 1
    n_base = int(round(layout.baseline_ms * sample_rate / 1000.0))
    n_stim = int(round(layout.stimulus_ms * sample_rate / 1000.0))
    g_base, _ = _mean_power_gain(n_base, sample_rate, config.band, b, a, passes)
    g_stim, k_stim = _mean_power_gain(n_stim, sample_rate, config.band, b, a, passes)
    v = layout.noise_sd ** 2
    noise_base = 2 * v / sample_rate * g_base
    noise_stim = 2 * v / sample_rate * g_stim
    _, h = signal.freqz(b, a, worN=[carrier], fs=sample_rate)
    h2 = float(np.abs(h[0])) ** (2 * passes)
    extra = np.maximum(np.asarray(responses, float) * noise_base - noise_stim, 0.0)
    return np.sqrt(extra * 2.0 * sample_rate * k_stim / (n_stim * h2))


def gen_raw(curve: TuningCurve, carrier: float = 60.0, sample_rate: float = 1000.0,
            layout: TrialLayout | None = None, seed: int = 0,
            config: PreprocessConfig | None = None) -> RawRecording:
    """Synthesize raw trials whose analytic gamma SNR equals the curve's truth.

    Uses ``curve.truth`` when present, else ``curve.responses``.  True
    responses below 1 cannot be produced by adding power and are rejected.
    """
    layout = layout or TrialLayout()
    if not GAMMA_BAND[0] < carrier < GAMMA_BAND[1]:
        raise ConfigError(f"carrier {carrier} Hz outside the gamma band {GAMMA_BAND}")
    if carrier >= sample_rate / 2:
        raise ConfigError("carrier above Nyquist")
    target = curve.truth if curve.truth is not None else curve.responses
    if np.any(target < 1.0 - 1e-12):
        raise SynthSpecError("raw synthesis needs true SNR responses >= 1")
    config = config or PreprocessConfig(contrasts=tuple(curve.contrasts))
    amps = tone_amplitudes(target, layout, carrier, sample_rate, config)

    rng = np.random.default_rng(seed)
    pre = int(round((layout.settle_ms + layout.baseline_ms) * sample_rate / 1000.0))
    n_stim = int(round(layout.stimulus_ms * sample_rate / 1000.0))
    t = np.arange(n_stim) / sample_rate
    trials = []
    for contrast, amp in zip(curve.contrasts, amps):
        for _ in range(layout.n_trials):
            x = rng.normal(0.0, layout.noise_sd, pre + n_stim)
            phase = rng.uniform(0.0, 2 * np.pi)
            if amp > 0:
                x[pre:] += amp * np.sin(2 * np.pi * carrier * t + phase)
            trials.append(Trial(float(contrast), x, pre))
    return RawRecording(curve.site_id, sample_rate, trials)


def with_seed(spec: SynthSpec, seed: int) -> SynthSpec:
    return replace(spec, seed=seed)


__all__ = [
    "SynthSpec", "CorpusSpec", "TrialLayout", "gen_curves", "default_corpus", "gen_raw",
    "tone_amplitudes", "CLASSES", "LINEAR", "SATURATING", "SUPERSATURATING", "DEFAULT_PARAMS",
]
