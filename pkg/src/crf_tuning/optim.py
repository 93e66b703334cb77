"""Parameter estimation for every model family.

* Linear: closed-form least squares.
* Naka-Rushton family and MLP: Levenberg-Marquardt on half the summed
  squared error, with Jacobians from :func:`crf_tuning.models.gradient`
  (the MLP Jacobian is the backpropagated output sensitivity).
* RBF: forward-selection orthogonal least squares over candidate centers.
* TSK fuzzy: grid partition plus global linear least squares.
* ANFIS: hybrid rule (gradient descent on premises, least squares on
  consequents).
* LOLIMOT: incremental midpoint splitting of the worst local model.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Any, Callable

import numpy as np

from .errors import ConfigError, DivergenceError, StepFailureError
from .models import (
    HyperParams,
    Kind,
    KernelModel,
    DEFAULT_INPUT_RANGE,
    eval_model,
    evaluate_raw,
    fuzzy_memberships,
    residual_jacobian,
)

log = logging.getLogger(__name__)

MAX_INFLATIONS = 20
SIGMA_FLOOR = 1e-3
C50_FLOOR = 1e-6
EXPONENT_FLOOR = 1e-3


@dataclass(frozen=True)
class TrainConfig:
    """Settings for iterative (LM) training."""

    max_epochs: int = 100
    init_step: float = 0.01
    init_weight_range: tuple[float, float] = (-0.6, 0.6)
    seed: int = 0
    tolerance: float = 1e-14

    def __post_init__(self):
        if int(self.max_epochs) < 1:
            raise ConfigError("max_epochs must be >= 1")
        lo, hi = self.init_weight_range
        if not hi > lo:
            raise ConfigError("init_weight_range must be a non-empty interval")
        if not self.init_step > 0:
            raise ConfigError("init_step must be positive")


@dataclass
class LMState:
    theta: np.ndarray
    mu: float
    iteration: int = 0
    cost_history: list[float] = field(default_factory=list)

    def __post_init__(self):
        if not self.mu > 0:
            raise ConfigError("LM damping must be positive")


@dataclass
class TraceRow:
    epoch: int
    train_mse: float
    val_mse: float | None = None


@dataclass
class FittedModel:
    """A fitted model plus its training trace and diagnostics."""

    model: KernelModel
    trace: list[TraceRow] = field(default_factory=list)
    flags: list[str] = field(default_factory=list)
    info: dict[str, Any] = field(default_factory=dict)

    def train_mse(self, phi, y) -> float:
        e = np.asarray(y, float) - eval_model(self.model, np.asarray(phi, float))
        return float(np.mean(e ** 2))


# ---------------------------------------------------------------------------
# Levenberg-Marquardt
# ---------------------------------------------------------------------------


def _half_sse(e):
    return 0.5 * float(e @ e)


def lm_step(model: KernelModel, phi, y, state: LMState,
            project: Callable[[np.ndarray], np.ndarray] | None = None) -> LMState:
    """One damped Gauss-Newton update.

    ``theta <- theta - (sum_k g_k g_k^T + mu I)^-1 grad J`` where
    ``grad J = -sum_k e_k g_k``.  A trial step that does not lower the cost
    is rejected and ``mu`` inflated tenfold, up to 20 times; an accepted
    step divides ``mu`` by ten.  A zero gradient leaves theta untouched.
    """
    phi = np.asarray(phi, float).reshape(-1)
    y = np.asarray(y, float).reshape(-1)
    if phi.size == 0:
        raise ConfigError("data must be non-empty")
    kind, hyper = model.kind, model.hyper
    theta = np.asarray(state.theta, float)
    yhat, jac = evaluate_raw(kind, hyper, theta, phi, True)
    e = y - yhat
    j0 = _half_sse(e)
    if not math.isfinite(j0):
        raise DivergenceError("non-finite cost at current parameters")
    grad = -jac.T @ e
    history = list(state.cost_history) or [j0]
    if not np.any(grad):
        return LMState(theta.copy(), state.mu, state.iteration + 1, history + [j0])
    normal = jac.T @ jac
    eye = np.eye(normal.shape[0])
    mu = state.mu
    for _ in range(MAX_INFLATIONS + 1):
        try:
            delta = np.linalg.solve(normal + mu * eye, grad)
        except np.linalg.LinAlgError:
            mu *= 10.0
            continue
        trial = theta - delta
        if project is not None:
            trial = project(trial)
        if np.all(np.isfinite(trial)):
            try:
                with np.errstate(over="ignore", invalid="ignore"):
                    j_new = _half_sse(y - evaluate_raw(kind, hyper, trial, phi, False)[0])
            except (ConfigError, FloatingPointError, ValueError):
                j_new = math.inf
            if j_new < j0:
                return LMState(trial, max(mu / 10.0, 1e-300), state.iteration + 1, history + [j_new])
        mu *= 10.0
    raise StepFailureError(f"no cost-decreasing step after {MAX_INFLATIONS} damping inflations")


def _mse(kind, hyper, theta, phi, y):
    r = y - evaluate_raw(kind, hyper, theta, phi, False)[0]
    return float(r @ r) / r.size


def lm_minimize(model: KernelModel, phi, y, mu0: float, max_iter: int, *,
                tolerance: float = 1e-14, rel_tolerance: float = 0.0, patience: int = 5,
                project=None, phi_val=None, y_val=None, record_trace: bool = True) -> FittedModel:
    """Iterate :func:`lm_step` until ``max_iter`` or the cost stops improving.

    Training stops when the cost falls to ``tolerance``, when the cost
    decreased by no more than ``rel_tolerance`` (relative) over the last
    ``patience`` steps, or when no decreasing step exists.  With
    ``record_trace`` a row per iteration records train and, if given,
    validation MSE; otherwise only the first and last rows are kept.
    """
    phi = np.asarray(phi, float).reshape(-1)
    y = np.asarray(y, float).reshape(-1)
    has_val = phi_val is not None and len(phi_val) > 0
    if has_val:
        phi_val = np.asarray(phi_val, float).reshape(-1)
        y_val = np.asarray(y_val, float).reshape(-1)
    kind, hyper = model.kind, model.hyper
    state = LMState(np.array(model.params, float), mu0)
    flags: list[str] = []

    def row(epoch, theta):
        va = _mse(kind, hyper, theta, phi_val, y_val) if has_val else None
        return TraceRow(epoch, _mse(kind, hyper, theta, phi, y), va)

    trace = [row(0, state.theta)]
    epoch = 0
    for epoch in range(1, max_iter + 1):
        try:
            state = lm_step(model, phi, y, state, project)
        except StepFailureError:
            flags.append("stagnated")
            epoch -= 1
            break
        if record_trace:
            trace.append(row(epoch, state.theta))
        hist = state.cost_history
        j = hist[-1]
        if j <= tolerance or j == hist[-2]:
            break
        if rel_tolerance > 0 and len(hist) > patience:
            ref = hist[-1 - patience]
            if ref - j <= rel_tolerance * ref:
                break
    if not record_trace and epoch > 0:
        trace.append(row(epoch, state.theta))
    final = model.with_params(state.theta)
    return FittedModel(final, trace, flags, {"cost_history": state.cost_history,
                                             "iterations": state.iteration, "final_mu": state.mu})


# ---------------------------------------------------------------------------
# Linear / Naka-Rushton family
# ---------------------------------------------------------------------------


def _project_nr(theta):
    out = np.array(theta, float)
    out[1] = max(out[1], C50_FLOOR)
    out[2] = max(out[2], EXPONENT_FLOOR)
    if out.size == 5:
        out[4] = max(out[4], EXPONENT_FLOOR)
    return out


def heuristic_nr_init(phi, y, kind: Kind) -> np.ndarray:
    """R_m = response range, C50 = 0.3, n = 2, s = 1, B = zero-contrast response."""
    phi = np.asarray(phi, float)
    y = np.asarray(y, float)
    base = float(y[np.argmin(phi)])
    theta = [float(y.max() - y.min()), 0.3, 2.0, base]
    if kind is Kind.MODIFIED_NAKA_RUSHTON:
        theta.append(1.0)
    return np.array(theta)


def fit_linear(phi, y, input_range=DEFAULT_INPUT_RANGE) -> FittedModel:
    phi = np.asarray(phi, float).reshape(-1)
    y = np.asarray(y, float).reshape(-1)
    design = np.column_stack([phi, np.ones_like(phi)])
    theta, *_ = np.linalg.lstsq(design, y, rcond=None)
    model = KernelModel(Kind.LINEAR, theta, HyperParams(), input_range)
    mse = float(np.mean((y - design @ theta) ** 2))
    return FittedModel(model, [TraceRow(0, mse)])


def fit_classic(phi, y, kind: Kind | str, warm_start=None, *, max_iter: int = 200,
                mu0: float = 0.01, n_restarts: int = 5, seed: int = 0,
                input_range=DEFAULT_INPUT_RANGE) -> FittedModel:
    """Fit the linear, Naka-Rushton or modified Naka-Rushton model.

    Parameters
    ----------
    phi, y : array_like
        Normalized contrasts and responses.
    kind : Kind
        One of the three classic kinds.
    warm_start : array_like, optional
        Initial theta (e.g. the previous LOOCV fold's estimate).  Defaults to
        :func:`heuristic_nr_init`.
    n_restarts : int
        Extra seeded restarts tried when LM diverges.
    """
    kind = Kind.parse(kind)
    phi = np.asarray(phi, float).reshape(-1)
    y = np.asarray(y, float).reshape(-1)
    if phi.size == 0:
        raise ConfigError("data must be non-empty")
    if kind is Kind.LINEAR:
        return fit_linear(phi, y, input_range)
    if kind not in (Kind.NAKA_RUSHTON, Kind.MODIFIED_NAKA_RUSHTON):
        raise ConfigError(f"fit_classic does not handle {kind.value}")
    if warm_start is not None:
        theta0 = _project_nr(np.asarray(warm_start, float))
    else:
        theta0 = heuristic_nr_init(phi, y, kind)
    rng = np.random.default_rng(seed)
    start = theta0
    last_error: Exception | None = None
    for attempt in range(n_restarts + 1):
        try:
            model = KernelModel(kind, start, HyperParams(), input_range)
            fit = lm_minimize(model, phi, y, mu0, max_iter, rel_tolerance=1e-6, project=_project_nr,
                              record_trace=False)
            fit.info["restarts"] = attempt
            return fit
        except (DivergenceError, FloatingPointError) as exc:
            last_error = exc
            log.debug("NR fit diverged (attempt %d): %s", attempt, exc)
            start = _project_nr(theta0 * np.exp(rng.normal(0.0, 0.5, theta0.size)))
    raise DivergenceError(f"{kind.value} fit failed after {n_restarts} restarts: {last_error}")


# ---------------------------------------------------------------------------
# MLP
# ---------------------------------------------------------------------------


def init_mlp(n: int, config: TrainConfig, input_range=DEFAULT_INPUT_RANGE) -> KernelModel:
    rng = np.random.default_rng(config.seed)
    lo, hi = config.init_weight_range
    theta = rng.uniform(lo, hi, 3 * n + 1)
    return KernelModel(Kind.MLP, theta, HyperParams(n_units=n), input_range)


def train_mlp(phi_train, y_train, phi_val=None, y_val=None, n: int = 3,
              config: TrainConfig | None = None, warm_start=None,
              input_range=DEFAULT_INPUT_RANGE) -> FittedModel:
    """Train a one-hidden-layer sigmoid MLP with Levenberg-Marquardt.

    Each epoch is one LM update over the whole training set.  Weights start
    uniformly in ``config.init_weight_range`` drawn from ``config.seed``
    unless ``warm_start`` supplies theta.
    """
    config = config or TrainConfig()
    if n < 1:
        raise ConfigError("n must be >= 1")
    if len(np.atleast_1d(phi_train)) == 0:
        raise ConfigError("training data must be non-empty")
    if warm_start is not None:
        model = KernelModel(Kind.MLP, warm_start, HyperParams(n_units=n), input_range)
    else:
        model = init_mlp(n, config, input_range)
    fit = lm_minimize(model, phi_train, y_train, config.init_step, int(config.max_epochs),
                      tolerance=config.tolerance, phi_val=phi_val, y_val=y_val)
    fit.info["seed"] = config.seed
    return fit


# ---------------------------------------------------------------------------
# RBF via forward-selection orthogonal least squares
# ---------------------------------------------------------------------------


def rbf_design(phi, centers, sigma):
    phi = np.asarray(phi, float).reshape(-1)
    return np.exp(-((phi[:, None] - np.asarray(centers, float)) ** 2) / (2.0 * sigma ** 2))


def fit_rbf_ols(phi, y, n_centers: int, sigma: float = 0.5, *, rank_tol: float = 1e-10,
                input_range=DEFAULT_INPUT_RANGE) -> FittedModel:
    """Greedy OLS center selection followed by a least-squares amplitude fit.

    Candidates are the distinct training inputs.  The bias column is
    orthogonalized out first; each round then picks the candidate whose
    Gram-Schmidt-orthogonalized regressor has the largest error-reduction
    ratio ``(w^T y)^2 / (w^T w * y^T y)``.  Candidates whose orthogonal
    remainder collapses below ``rank_tol`` are discarded, so fewer than
    ``n_centers`` may be selected.
    """
    phi = np.asarray(phi, float).reshape(-1)
    y = np.asarray(y, float).reshape(-1)
    if n_centers < 1:
        raise ConfigError("n_centers must be >= 1")
    if not sigma > 0:
        raise ConfigError("sigma must be positive")
    candidates = np.unique(phi)
    if n_centers > candidates.size:
        raise ConfigError(f"n_centers={n_centers} exceeds {candidates.size} distinct inputs")

    basis = [np.ones_like(phi) / math.sqrt(phi.size)]
    cand = rbf_design(phi, candidates, sigma)
    remaining = list(range(candidates.size))
    chosen: list[int] = []
    errs: list[float] = []
    yy = float(y @ y) or 1.0
    flags = []
    while len(chosen) < n_centers and remaining:
        best, best_err, best_w = None, -1.0, None
        for j in remaining:
            w = cand[:, j].copy()
            for q in basis:
                w -= (q @ w) * q
            norm = float(w @ w)
            if norm <= rank_tol * float(cand[:, j] @ cand[:, j]):
                continue
            err = float((w @ y) ** 2) / (norm * yy)
            if err > best_err:
                best, best_err, best_w = j, err, w
        if best is None:
            flags.append("rank_deficient")
            break
        chosen.append(best)
        errs.append(best_err)
        basis.append(best_w / math.sqrt(float(best_w @ best_w)))
        remaining.remove(best)
    if len(chosen) < n_centers and "rank_deficient" not in flags:
        flags.append("rank_deficient")

    centers = candidates[chosen]
    design = np.column_stack([rbf_design(phi, centers, sigma), np.ones_like(phi)])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    theta = np.concatenate([centers, coef[:-1], coef[-1:]])
    model = KernelModel(Kind.RBF, theta, HyperParams(n_units=len(chosen), sigma=sigma), input_range)
    mse = float(np.mean((y - design @ coef) ** 2))
    return FittedModel(model, [TraceRow(0, mse)], flags,
                       {"n_selected": len(chosen), "selection_order": [float(c) for c in centers],
                        "error_reduction_ratios": errs})


# ---------------------------------------------------------------------------
# TSK fuzzy family
# ---------------------------------------------------------------------------


def grid_premises(m: int) -> tuple[np.ndarray, np.ndarray]:
    """Uniform grid centers on [0, 1] with width half the spacing."""
    if m < 1:
        raise ConfigError("number of rules must be >= 1")
    if m == 1:
        return np.array([0.5]), np.array([0.5])
    centers = np.linspace(0.0, 1.0, m)
    return centers, np.full(m, 0.5 / (m - 1))


def fuzzy_design(phi, centers, sigmas):
    """Columns ``[psi_i * phi ..., psi_i ...]`` for the consequent LS problem."""
    phi = np.asarray(phi, float).reshape(-1)
    m = len(centers)
    theta = np.concatenate([np.zeros(2 * m), centers, sigmas])
    psi = fuzzy_memberships(theta, phi, m)
    return np.hstack([psi * phi[:, None], psi]), psi


def solve_consequents(phi, y, centers, sigmas):
    design, _ = fuzzy_design(phi, centers, sigmas)
    coef, _, rank, _ = np.linalg.lstsq(design, np.asarray(y, float).reshape(-1), rcond=None)
    return coef, rank


def _fuzzy_model(kind, coef, centers, sigmas, input_range):
    m = len(centers)
    theta = np.concatenate([coef[:m], coef[m:], centers, sigmas])
    return KernelModel(kind, theta, HyperParams(n_units=m), input_range)


def fit_fuzzy_grid(phi, y, m: int, *, input_range=DEFAULT_INPUT_RANGE) -> FittedModel:
    """Grid-partitioned TSK model with least-squares consequents."""
    phi = np.asarray(phi, float).reshape(-1)
    y = np.asarray(y, float).reshape(-1)
    centers, sigmas = grid_premises(m)
    coef, rank = solve_consequents(phi, y, centers, sigmas)
    flags = [] if rank == 2 * m else ["rank_deficient"]
    model = _fuzzy_model(Kind.TSK_FUZZY, coef, centers, sigmas, input_range)
    mse = float(np.mean((y - eval_model(model, phi)) ** 2))
    return FittedModel(model, [TraceRow(0, mse)], flags, {"rank": int(rank)})


def premise_loss_gradient(model: KernelModel, phi, y) -> np.ndarray:
    """Gradient of half the SSE with respect to the ``[c..., sigma...]`` block."""
    e, jac = residual_jacobian(model, phi, y)
    m = model.hyper.n_units
    return -(jac[:, 2 * m:].T @ e)


def train_anfis(phi_train, y_train, phi_val=None, y_val=None, m: int = 2, epochs: int = 1,
                step: float = 0.01, *, input_range=DEFAULT_INPUT_RANGE) -> FittedModel:
    """Hybrid-learning ANFIS.

    Premises start from the grid partition and consequents from least
    squares.  Each epoch takes one gradient-descent step of size ``step`` on
    the premise parameters, then re-solves the consequents.
    """
    if m < 1 or epochs < 1:
        raise ConfigError("m and epochs must be >= 1")
    phi = np.asarray(phi_train, float).reshape(-1)
    y = np.asarray(y_train, float).reshape(-1)
    centers, sigmas = grid_premises(m)
    coef, rank = solve_consequents(phi, y, centers, sigmas)
    model = _fuzzy_model(Kind.ANFIS, coef, centers, sigmas, input_range)
    flags = [] if rank == 2 * m else ["rank_deficient"]

    def row(epoch, mod):
        tr = float(np.mean((y - eval_model(mod, phi)) ** 2))
        va = None
        if phi_val is not None and len(phi_val):
            va = float(np.mean((np.asarray(y_val, float) - eval_model(mod, np.asarray(phi_val, float))) ** 2))
        return TraceRow(epoch, tr, va)

    trace = [row(0, model)]
    for epoch in range(1, epochs + 1):
        g = premise_loss_gradient(model, phi, y)
        centers = centers - step * g[:m]
        sigmas = sigmas - step * g[m:]
        if np.any(sigmas < SIGMA_FLOOR):
            sigmas = np.maximum(sigmas, SIGMA_FLOOR)
            if "sigma_clamped" not in flags:
                flags.append("sigma_clamped")
        coef, rank = solve_consequents(phi, y, centers, sigmas)
        model = _fuzzy_model(Kind.ANFIS, coef, centers, sigmas, input_range)
        trace.append(row(epoch, model))
    return FittedModel(model, trace, flags)


# ---------------------------------------------------------------------------
# LOLIMOT
# ---------------------------------------------------------------------------

VALIDITY_FACTOR = 1.0 / 3.0


def _lolimot_fit(phi, y, cells):
    centers = np.array([(lo + hi) / 2 for lo, hi in cells])
    sigmas = np.array([(hi - lo) * VALIDITY_FACTOR for lo, hi in cells])
    m = len(cells)
    theta = np.concatenate([np.zeros(2 * m), centers, sigmas])
    psi = fuzzy_memberships(theta, phi, m)
    design = np.column_stack([phi, np.ones_like(phi)])
    a = np.empty(m)
    b = np.empty(m)
    for i in range(m):
        # local weighted least squares, each local model on its own validity
        sw = np.sqrt(psi[:, i])
        coef, *_ = np.linalg.lstsq(design * sw[:, None], y * sw, rcond=None)
        a[i], b[i] = coef
    yhat = np.sum(psi * (np.outer(phi, a) + b), axis=1)
    e = y - yhat
    local_loss = psi.T @ (e ** 2)
    return a, b, centers, sigmas, float(e @ e), local_loss


def fit_lolimot(phi, y, nl_max: int, *, input_range=DEFAULT_INPUT_RANGE) -> FittedModel:
    """Local linear model tree on the normalized contrast axis.

    Starts from one local model on [0, 1].  Each iteration ranks local
    models by their validity-weighted squared error and tries to halve the
    worst one; a split is kept only if both halves contain training data and
    the global SSE decreases, otherwise the next-worst is tried.
    """
    if nl_max < 1:
        raise ConfigError("nl_max must be >= 1")
    phi = np.asarray(phi, float).reshape(-1)
    y = np.asarray(y, float).reshape(-1)
    cells = [(0.0, 1.0)]
    a, b, c, s, sse, local = _lolimot_fit(phi, y, cells)
    history = [sse]
    flags = []
    while len(cells) < nl_max:
        improved = False
        for idx in np.argsort(-local, kind="stable"):
            lo, hi = cells[idx]
            mid = (lo + hi) / 2
            left = np.any((phi >= lo) & (phi < mid))
            right = np.any((phi >= mid) & (phi <= hi))
            if not (left and right):
                continue
            trial = cells[:idx] + [(lo, mid), (mid, hi)] + cells[idx + 1:]
            fit = _lolimot_fit(phi, y, trial)
            if fit[4] < sse:
                cells = trial
                a, b, c, s, sse, local = fit
                history.append(sse)
                improved = True
                break
        if not improved:
            flags.append("no_improving_split")
            break
    theta = np.concatenate([a, b, c, s])
    model = KernelModel(Kind.LOLIMOT, theta, HyperParams(n_units=len(cells)), input_range)
    return FittedModel(model, [TraceRow(i, h / phi.size) for i, h in enumerate(history)], flags,
                       {"cells": [list(cell) for cell in cells], "sse_history": history})


# ---------------------------------------------------------------------------
# Dispatcher
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FitSettings:
    """Per-family estimator settings used by :func:`fit_model`."""

    mlp_neurons: int = 3
    mlp_epochs: int = 3
    mlp_init_step: float = 0.01
    mlp_init_range: tuple[float, float] = (-0.6, 0.6)
    rbf_centers: int = 3
    rbf_sigma: float = 0.5
    fuzzy_rules: int = 2
    anfis_rules: int = 2
    anfis_epochs: int = 1
    anfis_step: float = 0.01
    lolimot_locals: int = 2
    classic_max_iter: int = 200

    def updated(self, **kw) -> "FitSettings":
        return replace(self, **kw)


def fit_model(kind: Kind | str, phi, y, settings: FitSettings | None = None, *,
              seed: int = 0, warm_start=None, phi_val=None, y_val=None,
              input_range=DEFAULT_INPUT_RANGE) -> FittedModel:
    """Fit any family with its designated estimator."""
    kind = Kind.parse(kind)
    settings = settings or FitSettings()
    phi = np.asarray(phi, float).reshape(-1)
    y = np.asarray(y, float).reshape(-1)
    if kind in (Kind.LINEAR, Kind.NAKA_RUSHTON, Kind.MODIFIED_NAKA_RUSHTON):
        return fit_classic(phi, y, kind, warm_start, max_iter=settings.classic_max_iter,
                           seed=seed, input_range=input_range)
    if kind is Kind.MLP:
        cfg = TrainConfig(max_epochs=settings.mlp_epochs, init_step=settings.mlp_init_step,
                          init_weight_range=tuple(settings.mlp_init_range), seed=seed)
        return train_mlp(phi, y, phi_val, y_val, settings.mlp_neurons, cfg, warm_start, input_range)
    if kind is Kind.RBF:
        n = min(settings.rbf_centers, np.unique(phi).size)
        return fit_rbf_ols(phi, y, n, settings.rbf_sigma, input_range=input_range)
    if kind is Kind.TSK_FUZZY:
        return fit_fuzzy_grid(phi, y, settings.fuzzy_rules, input_range=input_range)
    if kind is Kind.ANFIS:
        return train_anfis(phi, y, phi_val, y_val, settings.anfis_rules, settings.anfis_epochs,
                           settings.anfis_step, input_range=input_range)
    if kind is Kind.LOLIMOT:
        return fit_lolimot(phi, y, settings.lolimot_locals, input_range=input_range)
    raise ConfigError(f"no estimator for {kind}")  # pragma: no cover

