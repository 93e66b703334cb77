"""Goodness-of-fit metrics, monotonicity classification and model comparison.

Two workflows are provided:

* per-curve leave-one-out cross-validation (:func:`loocv`,
  :func:`compare_models`), and
* the pooled supersaturated workflow (:func:`split_dataset`,
  :func:`pooled_comparison`, :func:`select_hyperparameters`), where the
  points of all supersaturating curves are fitted by one model.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence

import numpy as np

from .errors import (
    ConfigError,
    CRFError,
    DegenerateMeanError,
    DegenerateVarianceError,
    FlatCurveError,
)
from .models import NR_KINDS, Kind, KernelModel, eval_model, normalize_input
from .optim import FitSettings, FittedModel, TrainConfig, fit_model, train_mlp
from .preprocess import TuningCurve

log = logging.getLogger(__name__)

MI_EPSILON = 1e-9
R2_THRESHOLD = 0.6
SPLIT_SIZES = (156, 34, 34)
CROSSING_RTOL = 0.05

SUPERSATURATING = "supersaturating"
MONOTONE = "monotone"


# ---------------------------------------------------------------------------
# Metrics
# ---------------------------------------------------------------------------


def r_squared(y, yhat) -> float:
    """Coefficient of determination ``1 - SSE/SST``."""
    y = np.asarray(y, float).reshape(-1)
    yhat = np.asarray(yhat, float).reshape(-1)
    if y.size < 2 or y.size != yhat.size:
        raise ConfigError("r_squared needs >= 2 paired points")
    sst = float(np.sum((y - y.mean()) ** 2))
    if sst == 0:
        raise DegenerateVarianceError("targets have zero variance")
    return 1.0 - float(np.sum((y - yhat) ** 2)) / sst


def nmse(y, yhat) -> float:
    """Mean squared error divided by the product of target and prediction means."""
    y = np.asarray(y, float).reshape(-1)
    yhat = np.asarray(yhat, float).reshape(-1)
    if y.size == 0 or y.size != yhat.size:
        raise ConfigError("nmse needs paired, non-empty inputs")
    denom = float(y.mean() * yhat.mean())
    if denom == 0:
        raise DegenerateMeanError("mean(y) * mean(yhat) is zero")
    return float(np.mean((y - yhat) ** 2)) / denom


# ---------------------------------------------------------------------------
# Monotonicity
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MonotonicityReport:
    mi: float
    cls: str

    @property
    def supersaturating(self) -> bool:
        return self.cls == SUPERSATURATING


def monotonicity_index(curve: TuningCurve | Sequence[float], epsilon: float = MI_EPSILON) -> MonotonicityReport:
    """``MI = 1 - (R_m - R_100) / (R_m - R_0)``.

    ``R_m`` is the peak response, ``R_100`` the response at the highest
    contrast and ``R_0`` the zero-contrast response.  Curves with
    ``MI < 1 - epsilon`` are supersaturating.
    """
    responses = curve.responses if isinstance(curve, TuningCurve) else np.asarray(curve, float)
    r0, r100, rm = float(responses[0]), float(responses[-1]), float(np.max(responses))
    if rm == r0:
        raise FlatCurveError("peak response equals the zero-contrast response")
    mi = 1.0 - (rm - r100) / (rm - r0)
    return MonotonicityReport(mi, SUPERSATURATING if mi < 1.0 - epsilon else MONOTONE)


# ---------------------------------------------------------------------------
# Per-curve LOOCV
# ---------------------------------------------------------------------------


def curve_inputs(curve: TuningCurve) -> tuple[np.ndarray, np.ndarray, tuple[float, float]]:
    lo, hi = float(curve.contrasts[0]), float(curve.contrasts[-1])
    return normalize_input(curve.contrasts, lo, hi).value, curve.responses.copy(), (lo, hi)


def c50_estimate(model: KernelModel, grid_points: int = 1001) -> float:
    """Raw contrast of the half-maximum response.

    NR-family models report their C50 parameter.  For other families this is
    where the fitted curve first rises to halfway between its zero-contrast
    value and its maximum, located on a dense grid and refined by bisection.
    """
    lo, hi = model.input_range
    if model.kind in NR_KINDS:
        return float(model.params[1] * (hi - lo) + lo)
    grid = np.linspace(0.0, 1.0, grid_points)
    y = eval_model(model, grid)
    half = y[0] + (y.max() - y[0]) / 2.0
    if y.max() <= y[0]:
        return float("nan")
    k = int(np.argmax(y >= half))
    if k == 0:
        return float(lo)
    a, b = grid[k - 1], grid[k]
    for _ in range(60):
        mid = (a + b) / 2
        if eval_model(model, mid) >= half:
            b = mid
        else:
            a = mid
    return float(b * (hi - lo) + lo)


@dataclass
class FoldRecord:
    held_out: int
    target: float
    prediction: float
    error: float
    failed: bool = False


@dataclass
class FitResult:
    """Outcome of fitting one kind to one curve under LOOCV."""

    site_id: str
    kind: Kind
    model: KernelModel | None
    r2: float
    nmse: float
    per_fold: list[FoldRecord] = field(default_factory=list)
    c50_estimate: float = float("nan")
    train_r2: float = float("nan")
    failed_folds: int = 0
    flags: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.failed_folds == 0 and math.isfinite(self.r2)

    def to_dict(self) -> dict[str, Any]:
        return {
            "site_id": self.site_id,
            "kind": self.kind.value,
            "model": self.model.to_dict() if self.model is not None else None,
            "r2": _num(self.r2),
            "nmse": _num(self.nmse),
            "train_r2": _num(self.train_r2),
            "c50_estimate": _num(self.c50_estimate),
            "failed_folds": self.failed_folds,
            "flags": list(self.flags),
            "per_fold": [
                {"held_out": f.held_out, "target": f.target, "prediction": _num(f.prediction),
                 "error": _num(f.error), "failed": f.failed}
                for f in self.per_fold
            ],
        }


def _num(x):
    x = float(x)
    return x if math.isfinite(x) else None


def _safe(metric, y, yhat):
    try:
        return metric(y, yhat)
    except (CRFError, ZeroDivisionError):
        return float("nan")


def loocv(curve: TuningCurve, kind: Kind | str, settings: FitSettings | None = None, *,
          seed: int = 0) -> FitResult:
    """Leave-one-out cross-validation of one kind on one 8-point curve.

    Fold ``i`` trains on the other seven points, warm-started from fold
    ``i - 1``'s parameters, and predicts point ``i``.  R^2 and NMSE are
    computed from the eight held-out predictions; the reported model is a
    final refit on all points warm-started from the last fold.
    """
    kind = Kind.parse(kind)
    settings = settings or FitSettings()
    phi, y, rng_ = curve_inputs(curve)
    if phi.size != 8:
        raise ConfigError("LOOCV expects 8-point curves")
    folds: list[FoldRecord] = []
    warm = None
    flags: list[str] = []
    for i in range(phi.size):
        keep = np.arange(phi.size) != i
        try:
            fit = fit_model(kind, phi[keep], y[keep], settings, seed=seed, warm_start=warm, input_range=rng_)
            pred = float(eval_model(fit.model, phi[i]))
            if not math.isfinite(pred):
                raise CRFError("non-finite prediction")
            warm = fit.model.params
            folds.append(FoldRecord(i, float(y[i]), pred, float(y[i] - pred)))
        except (CRFError, FloatingPointError, np.linalg.LinAlgError) as exc:
            log.debug("fold %d of %s/%s failed: %s", i, curve.site_id, kind.value, exc)
            folds.append(FoldRecord(i, float(y[i]), float("nan"), float("nan"), failed=True))
    failed = sum(f.failed for f in folds)
    if failed:
        flags.append("failed_folds")
        r2 = nm = float("nan")
    else:
        preds = np.array([f.prediction for f in folds])
        r2 = _safe(r_squared, y, preds)
        nm = _safe(nmse, y, preds)
    model = None
    train_r2 = c50 = float("nan")
    try:
        final = fit_model(kind, phi, y, settings, seed=seed, warm_start=warm, input_range=rng_)
        model = final.model
        train_r2 = _safe(r_squared, y, eval_model(model, phi))
        c50 = c50_estimate(model)
    except (CRFError, FloatingPointError, np.linalg.LinAlgError) as exc:
        flags.append(f"refit_failed: {exc}")
    return FitResult(curve.site_id, kind, model, r2, nm, folds, c50, train_r2, failed, flags)


# ---------------------------------------------------------------------------
# Model comparison (table1.csv layout)
# ---------------------------------------------------------------------------


@dataclass
class ComparisonRow:
    kind: Kind
    mean_r2: float
    mean_nmse: float
    n_tuned: int
    n_curves: int
    mean_r2_all: float
    mean_nmse_all: float

    def to_dict(self):
        return {"kind": self.kind.value, "mean_r2": _num(self.mean_r2), "mean_nmse": _num(self.mean_nmse),
                "n_tuned": self.n_tuned, "n_curves": self.n_curves,
                "mean_r2_all": _num(self.mean_r2_all), "mean_nmse_all": _num(self.mean_nmse_all)}


@dataclass
class ComparisonTable:
    """Per-kind summary plus the per-curve fits behind it.

    ``mean_r2`` and ``mean_nmse`` average only the curves with
    ``R^2 >= threshold``; the ``*_all`` columns average every finite value.
    """

    rows: list[ComparisonRow]
    results: dict[Kind, list[FitResult]]
    threshold: float = R2_THRESHOLD

    def row(self, kind: Kind | str) -> ComparisonRow:
        kind = Kind.parse(kind)
        for r in self.rows:
            if r.kind is kind:
                return r
        raise KeyError(kind)

    def r2_lists(self) -> dict[str, list[float | None]]:
        return {k.value: [_num(r.r2) for r in res] for k, res in self.results.items()}

    def to_dict(self) -> dict[str, Any]:
        return {
            "threshold": self.threshold,
            "rows": [r.to_dict() for r in self.rows],
            "r2_by_kind": self.r2_lists(),
            "fits": {k.value: [r.to_dict() for r in res] for k, res in self.results.items()},
        }


def _mean(values):
    vals = [v for v in values if math.isfinite(v)]
    return float(np.mean(vals)) if vals else float("nan")


def summarize(results: dict[Kind, list[FitResult]], threshold: float = R2_THRESHOLD) -> ComparisonTable:
    rows = []
    for kind, res in results.items():
        tuned = [r for r in res if math.isfinite(r.r2) and r.r2 >= threshold]
        rows.append(ComparisonRow(
            kind,
            _mean([r.r2 for r in tuned]),
            _mean([r.nmse for r in tuned]),
            len(tuned),
            len(res),
            _mean([r.r2 for r in res]),
            _mean([r.nmse for r in res]),
        ))
    return ComparisonTable(rows, results, threshold)


def compare_models(curves: Sequence[TuningCurve], kinds: Iterable[Kind | str],
                   settings: FitSettings | None = None, *, seed: int = 0,
                   threshold: float = R2_THRESHOLD, executor=None) -> ComparisonTable:
    """LOOCV every curve with every kind and tabulate the results.

    Rows follow the order of ``kinds``.  ``executor`` (a
    ``concurrent.futures`` executor) fans the (kind, curve) jobs out; results
    are gathered back in input order so the table is deterministic.
    """
    kinds = [Kind.parse(k) for k in kinds]
    if not curves:
        raise ConfigError("compare_models needs at least one curve")
    settings = settings or FitSettings()
    jobs = [(k, c) for k in kinds for c in curves]
    if executor is None:
        fits = [loocv(c, k, settings, seed=seed) for k, c in jobs]
    else:
        futures = [executor.submit(loocv, c, k, settings, seed=seed) for k, c in jobs]
        fits = [f.result() for f in futures]
    results: dict[Kind, list[FitResult]] = {k: [] for k in kinds}
    for (k, _), fit in zip(jobs, fits):
        results[k].append(fit)
    return summarize(results, threshold)


# ---------------------------------------------------------------------------
# Pooled supersaturated workflow
# ---------------------------------------------------------------------------


@dataclass
class Dataset:
    """Pooled (normalized contrast, response) points with a train/val/test split."""

    phi: np.ndarray
    y: np.ndarray
    train: np.ndarray
    val: np.ndarray
    test: np.ndarray
    input_range: tuple[float, float] = (0.0, 0.76)

    def part(self, name: str) -> tuple[np.ndarray, np.ndarray]:
        idx = getattr(self, name)
        return self.phi[idx], self.y[idx]


def pool_points(curves: Sequence[TuningCurve]) -> tuple[np.ndarray, np.ndarray, tuple[float, float]]:
    """Concatenate curves into (normalized contrast, response) arrays."""
    if not curves:
        raise ConfigError("no curves to pool")
    phis, ys = [], []
    rng_ = None
    for c in curves:
        phi, y, r = curve_inputs(c)
        if rng_ is not None and r != rng_:
            raise ConfigError("pooled curves must share a contrast range")
        rng_ = r
        phis.append(phi)
        ys.append(y)
    return np.concatenate(phis), np.concatenate(ys), rng_


def scaled_split_sizes(n: int, base: tuple[int, int, int] = SPLIT_SIZES) -> tuple[int, int, int]:
    """``base`` proportions applied to a pool of ``n`` points (largest remainder).

    >>> scaled_split_sizes(224)
    (156, 34, 34)
    >>> scaled_split_sizes(112)
    (78, 17, 17)
    """
    if n < 3:
        raise ConfigError(f"a pool of {n} points cannot be split three ways")
    exact = np.asarray(base, float) * n / sum(base)
    sizes = np.floor(exact).astype(int)
    for i in np.argsort(-(exact - sizes), kind="stable")[: n - sizes.sum()]:
        sizes[i] += 1
    # every partition needs at least one point
    while sizes.min() == 0:
        sizes[int(np.argmax(sizes))] -= 1
        sizes[int(np.argmin(sizes))] += 1
    return tuple(int(s) for s in sizes)


def split_dataset(phi, y, seed: int, sizes: tuple[int, int, int] = SPLIT_SIZES,
                  input_range=(0.0, 0.76)) -> Dataset:
    """Disjoint random train/val/test split stratified by contrast level.

    Each contrast level is allotted to the partitions in proportion to its
    share of the pool; fractional quotas are resolved by largest remainder
    with seeded tie-breaking so the totals equal ``sizes`` exactly.
    """
    phi = np.asarray(phi, float).reshape(-1)
    y = np.asarray(y, float).reshape(-1)
    total = sum(sizes)
    if phi.size != total or y.size != total:
        raise ConfigError(f"pool has {phi.size} points; split sizes {sizes} need {total}")
    rng = np.random.default_rng(seed)
    levels, inverse = np.unique(phi, return_inverse=True)
    counts = np.bincount(inverse)
    # quotas[level, part]
    exact = np.outer(counts, sizes) / total
    quotas = np.floor(exact).astype(int)
    # fix partition totals (columns) first, then level totals (rows)
    for part in range(len(sizes)):
        short = sizes[part] - quotas[:, part].sum()
        if short > 0:
            frac = exact[:, part] - quotas[:, part] + rng.uniform(0, 1e-9, len(levels))
            for lvl in np.argsort(-frac, kind="stable")[:short]:
                quotas[lvl, part] += 1
    _balance_rows(quotas, counts, np.array(sizes))
    parts = [[], [], []]
    for lvl in range(len(levels)):
        members = rng.permutation(np.flatnonzero(inverse == lvl))
        start = 0
        for part in range(3):
            parts[part].extend(members[start:start + quotas[lvl, part]])
            start += quotas[lvl, part]
    train, val, test = (np.sort(np.array(p, dtype=int)) for p in parts)
    return Dataset(phi, y, train, val, test, tuple(input_range))


def _balance_rows(quotas, counts, sizes):
    """Move units between partitions until every level's quotas sum to its count."""
    for _ in range(quotas.size * 4):
        excess = quotas.sum(axis=1) - counts
        if not np.any(excess):
            return
        over = int(np.argmax(excess))
        under = int(np.argmin(excess))
        # a partition where `over` can give a unit to `under` without changing column sums
        for part in np.argsort(-quotas[over]):
            if quotas[over, part] > 0:
                quotas[over, part] -= 1
                quotas[under, part] += 1
                break
    if np.any(quotas.sum(axis=1) != counts):  # pragma: no cover
        raise ConfigError("could not balance stratified split")


@dataclass
class PooledResult:
    """Test-set performance of each kind on one pooled split."""

    seed: int
    test_nmse: dict[Kind, float]
    test_r2: dict[Kind, float]
    fits: dict[Kind, FittedModel]
    c50: dict[Kind, float]

    def to_dict(self):
        return {
            "seed": self.seed,
            "test_nmse": {k.value: _num(v) for k, v in self.test_nmse.items()},
            "test_r2": {k.value: _num(v) for k, v in self.test_r2.items()},
            "c50": {k.value: _num(v) for k, v in self.c50.items()},
            "models": {k.value: f.model.to_dict() for k, f in self.fits.items()},
            "traces": {k.value: [[t.epoch, t.train_mse, t.val_mse] for t in f.trace]
                       for k, f in self.fits.items()},
        }


def pooled_comparison(curves: Sequence[TuningCurve], kinds: Iterable[Kind | str],
                      settings: FitSettings | None = None, *, seed: int = 0,
                      sizes: tuple[int, int, int] = SPLIT_SIZES) -> PooledResult:
    """Split the pooled points, train each kind on the training part and score the test part.

    Validation points are passed to the iterative trainers (MLP, ANFIS) for
    their traces; the classic models use the training part only.
    """
    settings = settings or FitSettings()
    phi, y, rng_ = pool_points(curves)
    ds = split_dataset(phi, y, seed, sizes, rng_)
    ptr, ytr = ds.part("train")
    pva, yva = ds.part("val")
    pte, yte = ds.part("test")
    nm, r2, fits, c50 = {}, {}, {}, {}
    for kind in (Kind.parse(k) for k in kinds):
        try:
            fit = fit_model(kind, ptr, ytr, settings, seed=seed, phi_val=pva, y_val=yva, input_range=rng_)
            pred = eval_model(fit.model, pte)
            fits[kind] = fit
            nm[kind] = _safe(nmse, yte, pred)
            r2[kind] = _safe(r_squared, yte, pred)
            c50[kind] = c50_estimate(fit.model)
        except (CRFError, FloatingPointError, np.linalg.LinAlgError) as exc:
            log.warning("pooled fit of %s failed: %s", kind.value, exc)
            nm[kind] = r2[kind] = c50[kind] = float("nan")
    return PooledResult(seed, nm, r2, fits, c50)


# ---------------------------------------------------------------------------
# Hyperparameter selection
# ---------------------------------------------------------------------------


def pick_crossing(candidates: Sequence[int], train_mse: Sequence[float],
                  val_mse: Sequence[float], rtol: float = CROSSING_RTOL) -> tuple[int, bool]:
    """Smallest candidate after which validation error rises while training error falls.

    Parameters
    ----------
    candidates : sequence of int
        Swept values, ascending.
    train_mse, val_mse : sequence of float
        Errors observed at each candidate.
    rtol : float
        Relative changes at or below this size count as ties, so noise-level
        wiggles on a plateau neither trigger a crossing nor decide the fallback.

    Returns
    -------
    (choice, fallback_used)
        Without a crossing, the smallest candidate whose validation error is
        within ``rtol`` of the minimum is returned and ``fallback_used`` is True.
    """
    cands = list(candidates)
    tr = np.asarray(train_mse, float)
    va = np.asarray(val_mse, float)
    if len(cands) != len(tr) or len(cands) != len(va) or not cands:
        raise ConfigError("candidate and error sequences must be non-empty and equally long")
    for j in range(len(cands) - 1):
        if va[j + 1] > va[j] * (1.0 + rtol) and tr[j + 1] < tr[j] * (1.0 - rtol):
            return cands[j], False
    best = np.nanmin(va)
    return cands[int(np.flatnonzero(va <= best * (1.0 + rtol))[0])], True


@dataclass
class HyperSearchResult:
    optimal_neurons: list[int]
    optimal_epochs: list[int]
    seeds: list[int]
    flags: list[list[str]]
    neuron_sweeps: list[dict[str, list[float]]]
    epoch_sweeps: list[dict[str, list[float]]]
    candidate_neurons: list[int]
    candidate_epochs: list[int]

    @property
    def neurons_mean(self) -> float:
        return float(np.mean(self.optimal_neurons))

    @property
    def neurons_std(self) -> float:
        return float(np.std(self.optimal_neurons))

    @property
    def epochs_mean(self) -> float:
        return float(np.mean(self.optimal_epochs))

    @property
    def epochs_std(self) -> float:
        return float(np.std(self.optimal_epochs))

    def to_dict(self):
        return {
            "candidate_neurons": self.candidate_neurons,
            "candidate_epochs": self.candidate_epochs,
            "optimal_neurons": {"per_seed": self.optimal_neurons, "mean": self.neurons_mean,
                                "std": self.neurons_std},
            "optimal_epochs": {"per_seed": self.optimal_epochs, "mean": self.epochs_mean,
                               "std": self.epochs_std},
            "runs": [
                {"seed": s, "neurons": n, "epochs": e, "flags": f, "neuron_sweep": ns, "epoch_sweep": es}
                for s, n, e, f, ns, es in zip(self.seeds, self.optimal_neurons, self.optimal_epochs,
                                              self.flags, self.neuron_sweeps, self.epoch_sweeps)
            ],
        }


def _final_mse(fit: FittedModel):
    row = fit.trace[-1]
    return row.train_mse, row.val_mse


def _epoch_curve(fit: FittedModel, epochs: Sequence[int]):
    """Train/val MSE after each epoch count; early-stopped runs hold their last value."""
    by_epoch = {r.epoch: r for r in fit.trace}
    last = fit.trace[-1]
    tr, va = [], []
    for e in epochs:
        r = by_epoch.get(e, last if e > last.epoch else by_epoch[max(k for k in by_epoch if k <= e)])
        tr.append(r.train_mse)
        va.append(r.val_mse)
    return tr, va


def hyper_run(ds: Dataset, candidate_neurons: Sequence[int], candidate_epochs: Sequence[int],
              seed: int, sweep_epochs: int | None = None, init_step: float = 0.01,
              init_range=(-0.6, 0.6), rtol: float = CROSSING_RTOL):
    """One selection run: sweep neurons at fixed epochs, then epochs at the chosen size."""
    ptr, ytr = ds.part("train")
    pva, yva = ds.part("val")
    fixed = sweep_epochs or max(candidate_epochs)
    flags = []
    tr_n, va_n = [], []
    for n in candidate_neurons:
        cfg = TrainConfig(max_epochs=fixed, init_step=init_step, init_weight_range=init_range, seed=seed)
        fit = train_mlp(ptr, ytr, pva, yva, n, cfg, input_range=ds.input_range)
        t, v = _final_mse(fit)
        tr_n.append(t)
        va_n.append(v)
    best_n, fb = pick_crossing(candidate_neurons, tr_n, va_n, rtol)
    if fb:
        flags.append("neurons_fallback")
    cfg = TrainConfig(max_epochs=max(candidate_epochs), init_step=init_step, init_weight_range=init_range,
                      seed=seed)
    fit = train_mlp(ptr, ytr, pva, yva, best_n, cfg, input_range=ds.input_range)
    tr_e, va_e = _epoch_curve(fit, candidate_epochs)
    best_e, fb = pick_crossing(candidate_epochs, tr_e, va_e, rtol)
    if fb:
        flags.append("epochs_fallback")
    return (best_n, best_e, flags, {"train": tr_n, "val": va_n}, {"train": tr_e, "val": va_e})


def select_hyperparameters(phi, y, candidate_neurons: Sequence[int], candidate_epochs: Sequence[int],
                           n_runs: int = 50, *, seeds: Sequence[int] | None = None,
                           sizes: tuple[int, int, int] = SPLIT_SIZES, sweep_epochs: int | None = None,
                           input_range=(0.0, 0.76), rtol: float = CROSSING_RTOL,
                           executor=None) -> HyperSearchResult:
    """Repeat the neuron/epoch selection over ``n_runs`` seeds.

    Each seed re-splits the pool and re-initializes the network.
    """
    neurons = sorted(int(n) for n in candidate_neurons)
    epochs = sorted(int(e) for e in candidate_epochs)
    if not neurons or not epochs:
        raise ConfigError("candidate ranges must be non-empty")
    if neurons[0] < 1 or epochs[0] < 1:
        raise ConfigError("candidates must be >= 1")
    seeds = list(seeds) if seeds is not None else list(range(n_runs))
    datasets = [split_dataset(phi, y, s, sizes, input_range) for s in seeds]
    if executor is None:
        runs = [hyper_run(ds, neurons, epochs, s, sweep_epochs, rtol=rtol) for ds, s in zip(datasets, seeds)]
    else:
        futures = [executor.submit(hyper_run, ds, neurons, epochs, s, sweep_epochs, rtol=rtol)
                   for ds, s in zip(datasets, seeds)]
        runs = [f.result() for f in futures]
    return HyperSearchResult(
        [r[0] for r in runs], [r[1] for r in runs], seeds, [r[2] for r in runs],
        [r[3] for r in runs], [r[4] for r in runs], neurons, epochs,
    )
