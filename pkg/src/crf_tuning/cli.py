"""``crf`` command-line front end.

Subcommands::

    crf preprocess  --input DIR --config FILE --out curves.csv
    crf classify    --curves curves.csv --out classes.csv
    crf fit         --curves curves.csv --config FILE --out-dir DIR
    crf hypersearch --curves curves.csv --config FILE --out hyper.json
    crf synth       --spec spec.json --out-dir DIR

Every command computes its full result in memory before writing anything,
so a parse or validation error never leaves partial output.  ``CRF_SEED``
overrides the configured seed and ``CRF_THREADS`` bounds the worker pool.
"""

from __future__ import annotations

import argparse
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager
from typing import Any, Sequence

import numpy as np

from . import __version__
from . import formats
from .config import PipelineConfig, load_config
from .errors import CRFError, FlatCurveError
from .evaluation import (
    SPLIT_SIZES,
    compare_models,
    monotonicity_index,
    pool_points,
    pooled_comparison,
    scaled_split_sizes,
    select_hyperparameters,
)
from .models import Kind
from .preprocess import TuningCurve, _filtered, build_tuning_curve, stationarity_flag
from .synth import CorpusSpec, SynthSpec, TrialLayout, gen_curves, gen_raw

log = logging.getLogger("crf")

DENSE_POINTS = 77  # 0.01 contrast steps over the default 0..0.76 range


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------


def _config(path) -> PipelineConfig:
    return load_config(path).with_env()


@contextmanager
def _executor(threads: int):
    if threads <= 1:
        yield None
        return
    with ProcessPoolExecutor(max_workers=threads) as ex:
        yield ex


def _classify(curves: Sequence[TuningCurve]):
    """Split curves into (rows, supersaturating curves, skipped site ids)."""
    rows, supers, skipped = [], [], []
    for c in curves:
        try:
            rep = monotonicity_index(c)
        except FlatCurveError:
            skipped.append(c.site_id)
            continue
        rows.append((c.site_id, rep.mi, rep.cls))
        if rep.supersaturating:
            supers.append(c)
    return rows, supers, skipped


def _pool_sizes(n_points: int) -> tuple[int, int, int]:
    return SPLIT_SIZES if n_points == sum(SPLIT_SIZES) else scaled_split_sizes(n_points)


def _report_config(cfg: PipelineConfig) -> dict[str, Any]:
    """Config echo for reports; the worker count is left out so output does not depend on it."""
    d = cfg.to_dict()
    d["run"].pop("threads")
    return d


def _dense_grid(curve: TuningCurve) -> np.ndarray:
    return np.linspace(curve.contrasts[0], curve.contrasts[-1], DENSE_POINTS)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_preprocess(args) -> int:
    cfg = _config(args.config)
    recordings = formats.read_raw(args.input)
    curves = []
    for rec in recordings:
        curves.append(build_tuning_curve(rec, cfg.preprocess))
        filtered = _filtered(rec.trials, rec.sample_rate, cfg.preprocess)
        # stimulus onset legitimately changes the signal, so check post-onset samples
        flags = [stationarity_flag(t.samples[t.onset_index:]).stationary for t in filtered]
        n_bad = flags.count(False)
        state = "stationary" if n_bad == 0 else "NON-STATIONARY"
        print(f"{rec.site_id}: {state} ({n_bad}/{len(flags)} trials flagged)")
    formats.write_text_atomic(args.out, formats.curves_csv_text(curves))
    print(f"wrote {len(curves)} curves to {args.out}")
    return 0


def cmd_classify(args) -> int:
    curves = formats.read_curves(args.curves)
    if not curves:
        log.warning("no curves in %s; writing an empty classification", args.curves)
    rows, supers, skipped = _classify(curves)
    out_rows = [(s, mi, cls) for s, mi, cls in rows] + [(s, None, "skipped") for s in skipped]
    formats.write_text_atomic(args.out, formats.classes_csv_text(out_rows))
    n_mono = len(rows) - len(supers)
    print(f"supersaturating: {len(supers)}")
    print(f"monotone: {n_mono}")
    if skipped:
        print(f"skipped (flat): {len(skipped)}")
        for s in skipped:
            print(f"  {s}")
    return 0


def _fig_files(curves, table, pooled, supers, svg: bool) -> dict[str, str]:
    files: dict[str, str] = {}
    rows = []
    fit_rows = []
    for kind, results in table.results.items():
        for curve, res in zip(curves, results):
            if res.model is None:
                continue
            grid = _dense_grid(curve)
            pred = res.model.predict_contrast(grid)
            fit_rows.extend([curve.site_id, kind.value, formats.fmt(x), formats.fmt(p)]
                            for x, p in zip(grid, pred))
    for c in curves:
        rows.extend([c.site_id, formats.fmt(x), formats.fmt(r)] for x, r in zip(c.contrasts, c.responses))
    files["fig_data/fig1_curves.csv"] = formats.csv_text(["site_id", "contrast", "response"], rows)
    files["fig_data/fig1_fits.csv"] = formats.csv_text(["site_id", "kind", "contrast", "prediction"], fit_rows)
    r2_rows = [[kind.value, r.site_id, formats.fmt(r.r2)]
               for kind, results in table.results.items() for r in results]
    files["fig_data/fig3_r2.csv"] = formats.csv_text(["kind", "site_id", "r2"], r2_rows)
    if pooled is not None:
        grid = _dense_grid(supers[0])
        prow = []
        for kind, fit in pooled.fits.items():
            pred = fit.model.predict_contrast(grid)
            prow.extend([kind.value, formats.fmt(x), formats.fmt(p)] for x, p in zip(grid, pred))
        files["fig_data/fig2_pooled_fits.csv"] = formats.csv_text(["kind", "contrast", "prediction"], prow)
        if Kind.MLP in pooled.fits:
            trace = [(t.epoch, t.train_mse, t.val_mse) for t in pooled.fits[Kind.MLP].trace]
            files["trace.csv"] = formats.trace_csv_text(trace)
    if svg:
        for i, c in enumerate(curves):
            lines = {}
            for kind, results in table.results.items():
                res = results[i]
                if res.model is None:
                    continue
                grid = _dense_grid(c)
                lines[kind.value] = (grid, res.model.predict_contrast(grid))
            files[f"fig_data/svg/{c.site_id}.svg"] = formats.overlay_svg(c.site_id, (c.contrasts, c.responses),
                                                                         lines)
    return files


def cmd_fit(args) -> int:
    cfg = _config(args.config)
    curves = formats.read_curves(args.curves)
    if not curves:
        raise CRFError(f"{args.curves}: no curves to fit")
    kinds = list(cfg.models.kinds)
    seed = cfg.run.seed
    with _executor(cfg.run.threads) as ex:
        table = compare_models(curves, kinds, cfg.models.settings, seed=seed,
                               threshold=cfg.eval.r2_threshold, executor=ex)
    class_rows, supers, skipped = _classify(curves)
    pooled = None
    if cfg.eval.pooled and supers:
        phi, _, _ = pool_points(supers)
        pseed = cfg.eval.pooled_seed if cfg.eval.pooled_seed is not None else seed
        pooled = pooled_comparison(supers, kinds, cfg.models.settings, seed=pseed,
                                   sizes=_pool_sizes(phi.size))
    elif cfg.eval.pooled:
        log.warning("no supersaturating curves; pooled workflow skipped")
    report: dict[str, Any] = {
        "version": __version__,
        "config": _report_config(cfg),
        "n_curves": len(curves),
        "classes": {"supersaturating": [s for s, _, c in class_rows if c == "supersaturating"],
                    "monotone": [s for s, _, c in class_rows if c != "supersaturating"],
                    "skipped": skipped},
        "comparison": table.to_dict(),
        "pooled": pooled.to_dict() if pooled is not None else None,
    }
    files = {"report.json": formats.dumps_json(report),
             "table1.csv": formats.table1_csv_text([r.to_dict() for r in table.rows])}
    files.update(_fig_files(curves, table, pooled, supers, cfg.output.svg))
    formats.write_files(args.out_dir, files)
    for r in table.rows:
        print(f"{r.kind.value:>22}  N={r.n_tuned:3d}/{r.n_curves}  mean R2={r.mean_r2:.3f}  "
              f"mean NMSE={r.mean_nmse:.3f}")
    if pooled is not None:
        for k, v in pooled.test_nmse.items():
            print(f"{'pooled ' + k.value:>29}  test NMSE={v:.3f}")
    return 0


def cmd_hypersearch(args) -> int:
    cfg = _config(args.config)
    curves = formats.read_curves(args.curves)
    _, supers, _ = _classify(curves)
    if not supers:
        raise CRFError(f"{args.curves}: no supersaturating curves to pool")
    phi, y, rng_ = pool_points(supers)
    h = cfg.hypersearch
    seeds = [cfg.run.seed + i for i in range(h.n_runs)]
    with _executor(cfg.run.threads) as ex:
        res = select_hyperparameters(phi, y, h.candidate_neurons, h.candidate_epochs, h.n_runs,
                                     seeds=seeds, sizes=_pool_sizes(phi.size), sweep_epochs=h.sweep_epochs,
                                     input_range=rng_, rtol=h.rtol, executor=ex)
    out = res.to_dict()
    out["config"] = cfg.to_dict()["hypersearch"]
    out["n_points"] = int(phi.size)
    formats.write_text_atomic(args.out, formats.dumps_json(out))
    print(f"neurons: {res.neurons_mean:.2f} +/- {res.neurons_std:.2f}")
    print(f"epochs:  {res.epochs_mean:.2f} +/- {res.epochs_std:.2f}")
    return 0


RAW_KEYS = {"carrier", "sample_rate", "n_trials", "noise_sd", "settle_ms", "baseline_ms", "stimulus_ms"}


def _synth_curves(spec: dict):
    body = {k: v for k, v in spec.items() if k != "raw"}
    if not body or "corpus" in body:
        extra = set(body) - {"corpus"}
        if extra:
            raise CRFError(f"unknown synth spec keys next to 'corpus': {sorted(extra)}")
        corpus = dict(body.get("corpus") or {})
        unknown = set(corpus) - set(CorpusSpec.__dataclass_fields__)
        if unknown:
            raise CRFError(f"unknown corpus keys: {sorted(unknown)}")
        if "contrasts" in corpus:
            corpus["contrasts"] = tuple(corpus["contrasts"])
        cs = CorpusSpec(**corpus)
        curves = []
        for s in cs.specs():
            curves.extend(gen_curves(s))
        return curves, {"corpus": cs.to_dict()}, cs.seed
    if "specs" in body:
        if set(body) != {"specs"}:
            raise CRFError("a 'specs' list cannot be combined with other keys")
        specs = [SynthSpec.from_dict(d) for d in body["specs"]]
    else:
        specs = [SynthSpec.from_dict(body)]
    curves = []
    for s in specs:
        curves.extend(gen_curves(s))
    ids = [c.site_id for c in curves]
    if len(set(ids)) != len(ids):
        raise CRFError("duplicate site ids; give each spec a distinct site_prefix")
    return curves, {"specs": [s.to_dict() for s in specs]}, specs[0].seed


def cmd_synth(args) -> int:
    spec = formats.read_json(args.spec)
    if not isinstance(spec, dict):
        raise CRFError(f"{args.spec}: spec must be a JSON object")
    curves, generator, seed = _synth_curves(spec)
    files = {"curves.csv": formats.curves_csv_text(curves)}
    raw = spec.get("raw")
    if raw is not None:
        raw = dict(raw)
        unknown = set(raw) - RAW_KEYS
        if unknown:
            raise CRFError(f"unknown raw keys: {sorted(unknown)}")
        carrier = float(raw.pop("carrier", 60.0))
        fs = float(raw.pop("sample_rate", 1000.0))
        layout = TrialLayout(**raw)
        seeds = np.random.SeedSequence([seed, 1]).spawn(len(curves))
        recs = [gen_raw(c, carrier, fs, layout, seed=int(s.generate_state(1)[0]))
                for c, s in zip(curves, seeds)]
        files.update({f"raw/{k}": v for k, v in formats.raw_files(recs).items()})
        generator["raw"] = {"carrier": carrier, "sample_rate": fs,
                            **{k: getattr(layout, k) for k in TrialLayout.__dataclass_fields__}}
    files["truth.json"] = formats.dumps_json(formats.truth_sidecar(curves, generator))
    formats.write_files(args.out_dir, files)
    n_super = sum(c.label == "supersaturating" for c in curves)
    print(f"wrote {len(curves)} curves ({n_super} supersaturating) to {args.out_dir}")
    return 0


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="crf", description="Contrast tuning-curve modelling pipeline.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("preprocess", help="raw trial CSVs -> curves.csv")
    s.add_argument("--input", required=True, help="trial directory, manifest.json or single trial CSV")
    s.add_argument("--config", help="TOML or JSON pipeline config")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_preprocess)

    s = sub.add_parser("classify", help="monotonicity index and class per site")
    s.add_argument("--curves", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_classify)

    s = sub.add_parser("fit", help="per-curve LOOCV comparison plus the pooled workflow")
    s.add_argument("--curves", required=True)
    s.add_argument("--config")
    s.add_argument("--out-dir", required=True)
    s.set_defaults(func=cmd_fit)

    s = sub.add_parser("hypersearch", help="MLP neuron/epoch selection over many seeds")
    s.add_argument("--curves", required=True)
    s.add_argument("--config")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_hypersearch)

    s = sub.add_parser("synth", help="generate synthetic curves (and optionally raw trials)")
    s.add_argument("--spec", required=True)
    s.add_argument("--out-dir", required=True)
    s.set_defaults(func=cmd_synth)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CRFError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
