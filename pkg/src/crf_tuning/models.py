"""Contrast response model families.

Every family is a scalar function of normalized contrast ``phi`` in [0, 1]
parameterised by a flat vector ``theta``.  Parameter layouts are fixed so
that optimizers and serialization agree:

==========================  ==========================================
kind                        theta layout
==========================  ==========================================
linear                      ``[A, B]``
naka_rushton                ``[R_m, C50, n, B]``
modified_naka_rushton       ``[R_m, C50, n, B, s]``
mlp (n hidden units)        ``[w_1..w_n, b_1..b_n, alpha_1..alpha_n, alpha_0]``
rbf (n centers)             ``[c_1..c_n, alpha_1..alpha_n, alpha_0]``
tsk_fuzzy / anfis / lolimot ``[a_1..a_M, b_1..b_M, c_1..c_M, sigma_1..sigma_M]``
==========================  ==========================================

The RBF width is a hyperparameter shared by all centers and is not part of
``theta``.  The three fuzzy kinds share one evaluator; they only differ in
how :mod:`crf_tuning.optim` estimates their parameters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

import numpy as np

from .errors import ConfigError, DegenerateMembershipError, DegenerateRangeError

__all__ = [
    "Kind",
    "HyperParams",
    "KernelModel",
    "NormalizedInput",
    "normalize_input",
    "denormalize_input",
    "n_params",
    "eval_model",
    "gradient",
    "residual_jacobian",
    "cost",
    "DEFAULT_INPUT_RANGE",
]

DEFAULT_INPUT_RANGE = (0.0, 0.76)


class Kind(str, Enum):
    LINEAR = "linear"
    NAKA_RUSHTON = "naka_rushton"
    MODIFIED_NAKA_RUSHTON = "modified_naka_rushton"
    MLP = "mlp"
    RBF = "rbf"
    TSK_FUZZY = "tsk_fuzzy"
    ANFIS = "anfis"
    LOLIMOT = "lolimot"

    @classmethod
    def parse(cls, value: "Kind | str") -> "Kind":
        if isinstance(value, Kind):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            names = ", ".join(k.value for k in cls)
            raise ConfigError(f"unknown model kind {value!r}; expected one of {names}") from None


FUZZY_KINDS = frozenset({Kind.TSK_FUZZY, Kind.ANFIS, Kind.LOLIMOT})
NR_KINDS = frozenset({Kind.NAKA_RUSHTON, Kind.MODIFIED_NAKA_RUSHTON})


@dataclass(frozen=True)
class HyperParams:
    """Structural hyperparameters.

    ``n_units`` is the hidden-neuron count (MLP), center count (RBF) or
    rule / local-model count (fuzzy kinds).  ``sigma`` is the shared RBF
    width on the normalized input scale.
    """

    n_units: int = 0
    sigma: float | None = None

    def to_dict(self) -> dict[str, Any]:
        return {"n_units": self.n_units, "sigma": self.sigma}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "HyperParams":
        return cls(n_units=int(d.get("n_units", 0)), sigma=d.get("sigma"))


def n_params(kind: Kind | str, hyper: HyperParams | None = None) -> int:
    kind = Kind.parse(kind)
    n = hyper.n_units if hyper is not None else 0
    if kind is Kind.LINEAR:
        return 2
    if kind is Kind.NAKA_RUSHTON:
        return 4
    if kind is Kind.MODIFIED_NAKA_RUSHTON:
        return 5
    if kind is Kind.MLP:
        return 3 * n + 1
    if kind is Kind.RBF:
        return 2 * n + 1
    return 4 * n


# ---------------------------------------------------------------------------
# Input normalization
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NormalizedInput:
    value: Any
    phi_min: float
    phi_max: float

    def invert(self):
        return denormalize_input(self.value, self.phi_min, self.phi_max)


def normalize_input(phi, phi_min: float, phi_max: float) -> NormalizedInput:
    """Min-max scale raw contrast onto [0, 1]."""
    if not phi_max > phi_min:
        raise DegenerateRangeError(f"phi_min ({phi_min}) must be < phi_max ({phi_max})")
    scaled = (np.asarray(phi, dtype=float) - phi_min) / (phi_max - phi_min)
    if scaled.ndim == 0:
        scaled = float(scaled)
    return NormalizedInput(scaled, float(phi_min), float(phi_max))


def denormalize_input(phi_n, phi_min: float, phi_max: float):
    out = np.asarray(phi_n, dtype=float) * (phi_max - phi_min) + phi_min
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# Model value type
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class KernelModel:
    """An immutable (kind, hyperparameters, theta) triple.

    ``input_range`` records the raw-contrast range used for normalization so
    that predictions can be made directly from raw contrast.
    """

    kind: Kind
    params: np.ndarray
    hyper: HyperParams = field(default_factory=HyperParams)
    input_range: tuple[float, float] = DEFAULT_INPUT_RANGE

    def __post_init__(self):
        kind = Kind.parse(self.kind)
        object.__setattr__(self, "kind", kind)
        theta = np.array(self.params, dtype=float).reshape(-1)
        theta.setflags(write=False)
        object.__setattr__(self, "params", theta)
        object.__setattr__(self, "input_range", (float(self.input_range[0]), float(self.input_range[1])))
        _validate(kind, theta, self.hyper)

    def __call__(self, phi):
        return eval_model(self, phi)

    def predict_contrast(self, contrast):
        """Evaluate at raw (unnormalized) contrast."""
        lo, hi = self.input_range
        return eval_model(self, normalize_input(contrast, lo, hi).value)

    def with_params(self, params) -> "KernelModel":
        return KernelModel(self.kind, params, self.hyper, self.input_range)

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind.value,
            "hyper": self.hyper.to_dict(),
            # float -> repr round-trips exactly through JSON
            "params": [float(p) for p in self.params],
            "input_range": list(self.input_range),
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "KernelModel":
        return cls(
            Kind.parse(d["kind"]),
            np.asarray(d["params"], dtype=float),
            HyperParams.from_dict(d.get("hyper", {})),
            tuple(d.get("input_range", DEFAULT_INPUT_RANGE)),
        )


def _validate(kind: Kind, theta: np.ndarray, hyper: HyperParams) -> None:
    if kind in (Kind.MLP, Kind.RBF) or kind in FUZZY_KINDS:
        if hyper.n_units < 1:
            raise ConfigError(f"{kind.value} needs hyper.n_units >= 1")
    expected = n_params(kind, hyper)
    if theta.size != expected:
        raise ConfigError(f"{kind.value} expects {expected} parameters, got {theta.size}")
    if not np.all(np.isfinite(theta)):
        raise ConfigError("parameters must be finite")
    if kind in NR_KINDS:
        if theta[1] <= 0 or theta[2] <= 0:
            raise ConfigError("C50 and n must be positive")
        if kind is Kind.MODIFIED_NAKA_RUSHTON and theta[4] <= 0:
            raise ConfigError("s must be positive")
    elif kind is Kind.RBF:
        if hyper.sigma is None or hyper.sigma <= 0:
            raise ConfigError("rbf needs a positive hyper.sigma")
    elif kind in FUZZY_KINDS:
        m = hyper.n_units
        if np.any(theta[3 * m:] <= 0):
            raise ConfigError("membership widths must be positive")


# ---------------------------------------------------------------------------
# Per-family value and Jacobian.  Each returns (yhat, dyhat/dtheta) with the
# Jacobian shaped (len(phi), len(theta)).
# ---------------------------------------------------------------------------


def _linear(theta, phi, want_jac):
    a, b = theta
    y = a * phi + b
    if not want_jac:
        return y, None
    return y, np.column_stack([phi, np.ones_like(phi)])


def _log_contrast(phi):
    # C^n via exp(n ln C); C == 0 maps to ln C = -inf so that C^n == 0 for n > 0
    with np.errstate(divide="ignore"):
        return np.log(np.maximum(phi, 0.0))


def _naka_rushton(theta, phi, want_jac):
    rm, c50, n, b = theta
    lc = _log_contrast(phi)
    lc50 = math.log(c50)
    # f = C^n / (C^n + C50^n) = 1 / (1 + exp(n (ln C50 - ln C)))
    f = np.where(np.isfinite(lc), 1.0 / (1.0 + np.exp(np.clip(n * (lc50 - lc), -700, 700))), 0.0)
    y = rm * f + b
    if not want_jac:
        return y, None
    g = f * (1.0 - f)
    dlog = np.where(np.isfinite(lc), lc - lc50, 0.0)
    jac = np.column_stack([f, -rm * g * n / c50, rm * g * dlog, np.ones_like(phi)])
    return y, jac


def _modified_naka_rushton(theta, phi, want_jac):
    rm, c50, n, b, s = theta
    lc = _log_contrast(phi)
    lc50 = math.log(c50)
    pos = np.isfinite(lc)
    lcs = np.where(pos, lc, 0.0)
    # ln D = ln(C^{sn} + C50^{sn}); f = C^n / D
    log_d = np.logaddexp(s * n * lcs, s * n * lc50)
    f = np.where(pos, np.exp(np.clip(n * lcs - log_d, -745, 700)), 0.0)
    y = rm * f + b
    if not want_jac:
        return y, None
    # share of C^{sn} in D; the C50 share is 1 - p
    p = np.where(pos, np.exp(np.clip(s * n * lcs - log_d, -745, 0)), 0.0)
    q = 1.0 - p
    d_c50 = -f * s * n * q / c50
    d_n = f * (lcs - s * (p * lcs + q * lc50))
    d_s = -f * n * (p * lcs + q * lc50)
    jac = np.column_stack([f, rm * d_c50, rm * d_n, np.ones_like(phi), rm * d_s])
    return y, jac


def _sigmoid(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _mlp(theta, phi, n, want_jac):
    w, b, alpha, alpha0 = theta[:n], theta[n:2 * n], theta[2 * n:3 * n], theta[3 * n]
    # hidden layer: (points, units)
    h = _sigmoid(np.outer(phi, w) + b)
    y = h @ alpha + alpha0
    if not want_jac:
        return y, None
    # backpropagate the output through the linear layer and the sigmoid
    delta = h * (1.0 - h) * alpha
    jac = np.hstack([delta * phi[:, None], delta, h, np.ones((phi.size, 1))])
    return y, jac


def _rbf(theta, phi, n, sigma, want_jac):
    c, alpha, alpha0 = theta[:n], theta[n:2 * n], theta[2 * n]
    diff = phi[:, None] - c
    g = np.exp(-(diff ** 2) / (2.0 * sigma ** 2))
    y = g @ alpha + alpha0
    if not want_jac:
        return y, None
    jac = np.hstack([g * alpha * diff / sigma ** 2, g, np.ones((phi.size, 1))])
    return y, jac


def fuzzy_memberships(theta, phi, m):
    """Normalized Gaussian validity functions, shape (points, rules)."""
    c, sig = theta[2 * m:3 * m], theta[3 * m:4 * m]
    expo = -((phi[:, None] - c) ** 2) / (2.0 * sig ** 2)
    # shared max shift keeps the largest weight at exactly 1
    shift = expo.max(axis=1, keepdims=True)
    w = np.exp(expo - shift)
    total = w.sum(axis=1, keepdims=True)
    if not np.all(np.isfinite(total)) or np.any(total <= 0):
        raise DegenerateMembershipError("membership weights vanished or became non-finite")
    return w / total


def _tsk(theta, phi, m, want_jac):
    a, b, c, sig = theta[:m], theta[m:2 * m], theta[2 * m:3 * m], theta[3 * m:4 * m]
    psi = fuzzy_memberships(theta, phi, m)
    local = np.outer(phi, a) + b
    y = np.sum(psi * local, axis=1)
    if not want_jac:
        return y, None
    diff = phi[:, None] - c
    spread = psi * (local - y[:, None])
    jac = np.hstack([psi * phi[:, None], psi, spread * diff / sig ** 2, spread * diff ** 2 / sig ** 3])
    return y, jac


def evaluate_raw(kind: Kind, hyper: HyperParams, theta: np.ndarray, phi: np.ndarray, want_jac: bool):
    """Unvalidated fast path used inside optimizer loops.

    ``phi`` must be a 1-D float array; returns ``(yhat, jac or None)``.
    """
    if kind is Kind.LINEAR:
        return _linear(theta, phi, want_jac)
    if kind is Kind.NAKA_RUSHTON:
        return _naka_rushton(theta, phi, want_jac)
    if kind is Kind.MODIFIED_NAKA_RUSHTON:
        return _modified_naka_rushton(theta, phi, want_jac)
    if kind is Kind.MLP:
        return _mlp(theta, phi, hyper.n_units, want_jac)
    if kind is Kind.RBF:
        return _rbf(theta, phi, hyper.n_units, hyper.sigma, want_jac)
    return _tsk(theta, phi, hyper.n_units, want_jac)


def _dispatch(model: KernelModel, phi, want_jac):
    return evaluate_raw(model.kind, model.hyper, model.params, phi, want_jac)


def _as_points(phi):
    arr = np.asarray(phi, dtype=float)
    return arr.reshape(-1), arr.ndim == 0


def eval_model(model: KernelModel, phi):
    """Model response at normalized contrast ``phi`` (scalar or array)."""
    pts, scalar = _as_points(phi)
    y, _ = _dispatch(model, pts, False)
    return float(y[0]) if scalar else y


def gradient(model: KernelModel, phi):
    """Analytic d(response)/d(theta).

    Returns a vector for scalar ``phi`` and a (points, params) matrix for an
    array of inputs.
    """
    pts, scalar = _as_points(phi)
    _, jac = _dispatch(model, pts, True)
    return jac[0] if scalar else jac


def residual_jacobian(model: KernelModel, phi, y):
    """Return ``(e, jac)`` with ``e = y - yhat`` and ``jac = d yhat / d theta``."""
    pts, _ = _as_points(phi)
    target = np.asarray(y, dtype=float).reshape(-1)
    if pts.size == 0:
        raise ConfigError("data must be non-empty")
    if target.size != pts.size:
        raise ConfigError("phi and y lengths differ")
    yhat, jac = _dispatch(model, pts, True)
    return target - yhat, jac


def cost(model: KernelModel, phi, y) -> float:
    """Half the sum of squared residuals."""
    e = np.asarray(y, dtype=float).reshape(-1) - eval_model(model, np.asarray(phi, dtype=float).reshape(-1))
    return 0.5 * float(e @ e)
