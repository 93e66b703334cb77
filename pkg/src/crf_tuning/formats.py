"""Readers and writers for the on-disk interchange formats.

Every writer produces deterministic bytes for identical inputs (fixed key
order, shortest round-trip float text, ``\\n`` line endings), and every
format written here is read back by the matching parser.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from .errors import DataError
from .preprocess import RawRecording, Trial, TuningCurve

TRIAL_HEADER = ["site_id", "contrast", "onset_index", "sample_rate"]
CURVE_HEADER = ["site_id", "contrast", "response", "n_trials"]
CLASS_HEADER = ["site_id", "mi", "class"]
TABLE1_HEADER = ["kind", "mean_r2", "mean_nmse", "n_tuned"]
TRACE_HEADER = ["epoch", "train_mse", "val_mse"]
MANIFEST_NAME = "manifest.json"


def fmt(x) -> str:
    """Shortest text that parses back to the same float; blank for missing/non-finite."""
    if x is None:
        return ""
    x = float(x)
    if not math.isfinite(x):
        return ""
    return repr(x)


def _parse_float(text: str, where: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise DataError(f"{where}: cannot parse {text!r} as a number") from None


def _parse_int(text: str, where: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise DataError(f"{where}: cannot parse {text!r} as an integer") from None


def _opt_float(text: str) -> float:
    return float(text) if text.strip() else float("nan")


def dumps_json(obj: Any) -> str:
    """Canonical JSON text: sorted keys, two-space indent, trailing newline."""
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def csv_text(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow(r)
    return buf.getvalue()


def write_text_atomic(path: str | os.PathLike, text: str) -> None:
    """Write ``text`` to ``path`` through a temporary file and an atomic rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_files(root: str | os.PathLike, files: Mapping[str, str]) -> None:
    """Write a prepared ``{relative path: text}`` bundle under ``root``.

    Callers assemble the full bundle before calling this, so a failure while
    computing results never leaves a half-written output directory behind.
    """
    root = Path(root)
    for rel in sorted(files):
        write_text_atomic(root / rel, files[rel])


# ---------------------------------------------------------------------------
# Raw trials
# ---------------------------------------------------------------------------


def trial_csv_text(site_id: str, sample_rate: float, trial: Trial) -> str:
    lines = [",".join(TRIAL_HEADER),
             f"{site_id},{fmt(trial.contrast)},{trial.onset_index},{fmt(sample_rate)}"]
    lines.extend(fmt(v) for v in trial.samples)
    return "\n".join(lines) + "\n"


def read_trial_csv(path: str | os.PathLike) -> tuple[str, float, Trial]:
    """Parse one trial file into ``(site_id, sample_rate, trial)``.

    Errors name the file and the 1-based line.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"{path}: {exc.strerror or exc}") from None
    lines = text.splitlines()
    if len(lines) < 2:
        raise DataError(f"{path}: expected a header line and a metadata line")
    header = [h.strip() for h in lines[0].split(",")]
    if header != TRIAL_HEADER:
        raise DataError(f"{path}:1: header must be {','.join(TRIAL_HEADER)}")
    meta = [m.strip() for m in lines[1].split(",")]
    if len(meta) != 4:
        raise DataError(f"{path}:2: expected 4 metadata fields, got {len(meta)}")
    site_id = meta[0]
    if not site_id:
        raise DataError(f"{path}:2: empty site_id")
    contrast = _parse_float(meta[1], f"{path}:2")
    onset = _parse_int(meta[2], f"{path}:2")
    fs = _parse_float(meta[3], f"{path}:2")
    samples = np.empty(len(lines) - 2)
    for i, line in enumerate(lines[2:]):
        samples[i] = _parse_float(line.strip(), f"{path}:{i + 3}")
    try:
        trial = Trial(contrast, samples, onset)
    except DataError as exc:
        raise DataError(f"{path}: {exc}") from None
    return site_id, fs, trial


def read_manifest(path: str | os.PathLike) -> list[Path]:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError(f"{path}: {exc}") from None
    files = data.get("trials") if isinstance(data, dict) else None
    if not isinstance(files, list) or not all(isinstance(f, str) for f in files):
        raise DataError(f"{path}: manifest needs a 'trials' list of file names")
    return [path.parent / f for f in files]


def read_raw(path: str | os.PathLike) -> list[RawRecording]:
    """Load recordings from a trial directory, a manifest file or a single trial CSV.

    A directory is read through its ``manifest.json`` when present and
    otherwise by taking every ``*.csv`` in sorted name order.  Trials are
    grouped by site id; sites come back sorted by id.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"{path}: no such file or directory")
    if path.is_dir():
        manifest = path / MANIFEST_NAME
        files = read_manifest(manifest) if manifest.exists() else sorted(path.glob("*.csv"))
    elif path.suffix == ".json":
        files = read_manifest(path)
    else:
        files = [path]
    sites: dict[str, tuple[float, list[Trial]]] = {}
    for f in files:
        site, fs, trial = read_trial_csv(f)
        if site in sites and sites[site][0] != fs:
            raise DataError(f"{f}: sample_rate {fs} differs from earlier trials of site {site}")
        sites.setdefault(site, (fs, []))[1].append(trial)
    return [RawRecording(s, fs, trials) for s, (fs, trials) in sorted(sites.items())]


def raw_files(recordings: Sequence[RawRecording]) -> dict[str, str]:
    """Trial CSVs plus a manifest, as a ``{relative path: text}`` bundle."""
    files: dict[str, str] = {}
    names = []
    for rec in recordings:
        counter: dict[float, int] = {}
        levels = {c: i for i, c in enumerate(rec.contrasts())}
        for trial in rec.trials:
            k = counter.get(trial.contrast, 0)
            counter[trial.contrast] = k + 1
            name = f"{rec.site_id}_c{levels[trial.contrast]}_t{k:03d}.csv"
            names.append(name)
            files[name] = trial_csv_text(rec.site_id, rec.sample_rate, trial)
    files[MANIFEST_NAME] = dumps_json({"trials": names})
    return files


# ---------------------------------------------------------------------------
# Tuning curves
# ---------------------------------------------------------------------------


def curves_csv_text(curves: Sequence[TuningCurve]) -> str:
    rows = []
    for c in curves:
        for x, r, n in zip(c.contrasts, c.responses, c.trial_counts):
            rows.append([c.site_id, fmt(x), fmt(r), n])
    return csv_text(CURVE_HEADER, rows)


def read_curves(path: str | os.PathLike) -> list[TuningCurve]:
    """Parse ``curves.csv``; sites keep their order of first appearance.

    An input holding only the header yields an empty list.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"{path}: {exc.strerror or exc}") from None
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        return []
    if [h.strip() for h in rows[0]] != CURVE_HEADER:
        raise DataError(f"{path}:1: header must be {','.join(CURVE_HEADER)}")
    grouped: dict[str, list[tuple[float, float, int]]] = {}
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != 4:
            raise DataError(f"{path}:{lineno}: expected 4 fields, got {len(row)}")
        where = f"{path}:{lineno}"
        grouped.setdefault(row[0].strip(), []).append(
            (_parse_float(row[1], where), _parse_float(row[2], where), _parse_int(row[3], where)))
    curves = []
    for site, pts in grouped.items():
        pts.sort()
        try:
            curves.append(TuningCurve(site, [p[0] for p in pts], [p[1] for p in pts], [p[2] for p in pts]))
        except DataError as exc:
            raise DataError(f"{path}: {exc}") from None
    return curves


def truth_sidecar(curves: Sequence[TuningCurve], generator: Mapping[str, Any]) -> dict[str, Any]:
    """Ground truth for synthetic curves, keyed by site id."""
    sites = {}
    for c in curves:
        params = getattr(c, "true_params", None)
        sites[c.site_id] = {
            "label": c.label,
            "truth": [float(v) for v in c.truth] if c.truth is not None else None,
            "true_params": [float(v) for v in params] if params is not None else None,
        }
    return {"generator": dict(generator), "sites": sites}


def read_truth(path: str | os.PathLike) -> dict[str, Any]:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError(f"{path}: {exc}") from None
    if not isinstance(data, dict) or "sites" not in data:
        raise DataError(f"{path}: truth sidecar needs a 'sites' object")
    return data


# ---------------------------------------------------------------------------
# Classification, tables, traces
# ---------------------------------------------------------------------------


def classes_csv_text(rows: Sequence[tuple[str, float | None, str]]) -> str:
    return csv_text(CLASS_HEADER, [[s, fmt(mi), cls] for s, mi, cls in rows])


def read_classes(path: str | os.PathLike) -> list[tuple[str, float, str]]:
    rows = list(csv.reader(io.StringIO(Path(path).read_text(encoding="utf-8"))))
    if not rows or rows[0] != CLASS_HEADER:
        raise DataError(f"{path}:1: header must be {','.join(CLASS_HEADER)}")
    return [(r[0], _opt_float(r[1]), r[2]) for r in rows[1:] if r]


def table1_csv_text(rows: Sequence[Mapping[str, Any]]) -> str:
    return csv_text(TABLE1_HEADER, [[r["kind"], fmt(r["mean_r2"]), fmt(r["mean_nmse"]), r["n_tuned"]]
                                    for r in rows])


def read_table1(path: str | os.PathLike) -> list[dict[str, Any]]:
    rows = list(csv.reader(io.StringIO(Path(path).read_text(encoding="utf-8"))))
    if not rows or rows[0] != TABLE1_HEADER:
        raise DataError(f"{path}:1: header must be {','.join(TABLE1_HEADER)}")
    return [{"kind": r[0], "mean_r2": _opt_float(r[1]), "mean_nmse": _opt_float(r[2]), "n_tuned": int(r[3])}
            for r in rows[1:] if r]


def trace_csv_text(rows: Sequence[Sequence[float]]) -> str:
    return csv_text(TRACE_HEADER, [[int(e), fmt(t), fmt(v)] for e, t, v in rows])


def read_trace(path: str | os.PathLike) -> list[tuple[int, float, float]]:
    rows = list(csv.reader(io.StringIO(Path(path).read_text(encoding="utf-8"))))
    if not rows or rows[0] != TRACE_HEADER:
        raise DataError(f"{path}:1: header must be {','.join(TRACE_HEADER)}")
    return [(int(r[0]), _opt_float(r[1]), _opt_float(r[2])) for r in rows[1:] if r]


def read_json(path: str | os.PathLike) -> Any:
    path = Path(path)
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError(f"{path}: {exc}") from None


# ---------------------------------------------------------------------------
# SVG
# ---------------------------------------------------------------------------

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf")


def overlay_svg(title: str, points: tuple[Sequence[float], Sequence[float]],
                lines: Mapping[str, tuple[Sequence[float], Sequence[float]]],
                width: int = 420, height: int = 300) -> str:
    """A small self-contained SVG: data markers plus one polyline per fitted model."""
    xs = [float(x) for x in points[0]]
    ys = [float(y) for y in points[1]]
    for lx, ly in lines.values():
        xs.extend(float(v) for v in lx)
        ys.extend(float(v) for v in ly if math.isfinite(v))
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y1 = y0 + 1.0
    pad = 40

    def px(x):
        return pad + (x - x0) / (x1 - x0) * (width - 2 * pad)

    def py(y):
        return height - pad - (y - y0) / (y1 - y0) * (height - 2 * pad)

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}">',
           f'<rect width="{width}" height="{height}" fill="white"/>',
           f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" font-size="13">{_esc(title)}</text>',
           f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>',
           f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>',
           f'<text x="{width / 2:.1f}" y="{height - 8}" text-anchor="middle" font-size="11">contrast</text>',
           f'<text x="12" y="{height / 2:.1f}" font-size="11" transform="rotate(-90 12 {height / 2:.1f})" '
           f'text-anchor="middle">SNR</text>']
    for i, (name, (lx, ly)) in enumerate(lines.items()):
        colour = _PALETTE[i % len(_PALETTE)]
        pts = " ".join(f"{px(float(a)):.2f},{py(float(b)):.2f}" for a, b in zip(lx, ly) if math.isfinite(b))
        out.append(f'<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{pts}"/>')
        out.append(f'<text x="{width - pad - 4}" y="{pad + 14 * i}" text-anchor="end" font-size="10" '
                   f'fill="{colour}">{_esc(name)}</text>')
    for a, b in zip(points[0], points[1]):
        out.append(f'<circle cx="{px(float(a)):.2f}" cy="{py(float(b)):.2f}" r="3" fill="black"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _esc(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
