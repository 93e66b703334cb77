import json
from pathlib import Path

import numpy as np
import pytest

from crf_tuning import formats
from crf_tuning.cli import main

SMALL_CORPUS = {"corpus": {"n_supersaturating": 4, "n_saturating": 2, "n_linear": 2, "seed": 3}}
FAST_CONFIG = {
    "models": {"kinds": ["linear", "modified_naka_rushton", "mlp"]},
    "hypersearch": {"candidate_neurons": [1, 2, 3], "candidate_epochs": [1, 2, 3], "n_runs": 2,
                    "sweep_epochs": 5},
    "output": {"svg": True},
}


def _write_json(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


def _tree(root: Path) -> dict[str, bytes]:
    return {str(p.relative_to(root)): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


@pytest.fixture
def small(tmp_path):
    spec = _write_json(tmp_path / "spec.json", SMALL_CORPUS)
    assert main(["synth", "--spec", spec, "--out-dir", str(tmp_path / "syn")]) == 0
    cfg = _write_json(tmp_path / "cfg.json", FAST_CONFIG)
    return tmp_path, tmp_path / "syn" / "curves.csv", cfg


def test_synth_defaults_give_corpus_counts(tmp_path, capsys):
    spec = _write_json(tmp_path / "spec.json", {})
    assert main(["synth", "--spec", spec, "--out-dir", str(tmp_path / "o")]) == 0
    curves = formats.read_curves(tmp_path / "o" / "curves.csv")
    assert len(curves) == 66
    assert "28 supersaturating" in capsys.readouterr().out


def test_synth_zero_noise_matches_sidecar(tmp_path):
    spec = _write_json(tmp_path / "spec.json", {"kind": "saturating", "n_curves": 3, "noise_sd": 0.0,
                                                "param_jitter": 0.2, "seed": 5})
    assert main(["synth", "--spec", spec, "--out-dir", str(tmp_path / "o")]) == 0
    truth = formats.read_truth(tmp_path / "o" / "truth.json")
    for c in formats.read_curves(tmp_path / "o" / "curves.csv"):
        np.testing.assert_array_equal(c.responses, truth["sites"][c.site_id]["truth"])


def test_synth_raw_then_preprocess(tmp_path, capsys):
    spec = _write_json(tmp_path / "spec.json", {
        "kind": "supersaturating", "n_curves": 2, "noise_sd": 0.0, "site_prefix": "m",
        "raw": {"n_trials": 20}})
    assert main(["synth", "--spec", spec, "--out-dir", str(tmp_path / "o")]) == 0
    out = tmp_path / "pre.csv"
    assert main(["preprocess", "--input", str(tmp_path / "o" / "raw"), "--out", str(out)]) == 0
    text = capsys.readouterr().out
    assert "m000:" in text and "m001:" in text
    truth = formats.read_truth(tmp_path / "o" / "truth.json")
    for c in formats.read_curves(out):
        t = np.array(truth["sites"][c.site_id]["truth"])
        assert np.max(np.abs(c.responses - t) / t) < 0.10
        assert c.trial_counts == (20,) * 8


def test_classify(small, capsys):
    tmp, curves, _ = small
    out = tmp / "classes.csv"
    assert main(["classify", "--curves", str(curves), "--out", str(out)]) == 0
    rows = formats.read_classes(out)
    assert sum(r[2] == "supersaturating" for r in rows) == 4
    assert "supersaturating: 4" in capsys.readouterr().out


def test_classify_flat_and_empty(tmp_path, capsys):
    c = tmp_path / "c.csv"
    lines = ["site_id,contrast,response,n_trials"]
    for x in (0, 0.02, 0.04, 0.09, 0.19, 0.38, 0.57, 0.76):
        lines.append(f"flat,{x},2.0,1")
    c.write_text("\n".join(lines) + "\n")
    assert main(["classify", "--curves", str(c), "--out", str(tmp_path / "o.csv")]) == 0
    assert formats.read_classes(tmp_path / "o.csv")[0][2] == "skipped"
    c.write_text("site_id,contrast,response,n_trials\n")
    assert main(["classify", "--curves", str(c), "--out", str(tmp_path / "e.csv")]) == 0
    assert formats.read_classes(tmp_path / "e.csv") == []


def test_fit_outputs(small):
    tmp, curves, cfg = small
    out = tmp / "fit"
    assert main(["fit", "--curves", str(curves), "--config", cfg, "--out-dir", str(out)]) == 0
    report = formats.read_json(out / "report.json")
    assert report["n_curves"] == 8
    assert set(report) == {"version", "config", "n_curves", "classes", "comparison", "pooled"}
    table = formats.read_table1(out / "table1.csv")
    assert [r["kind"] for r in table] == ["linear", "modified_naka_rushton", "mlp"]
    for name in ("fig_data/fig1_curves.csv", "fig_data/fig1_fits.csv", "fig_data/fig3_r2.csv",
                 "fig_data/fig2_pooled_fits.csv", "trace.csv", "fig_data/svg/sup000.svg"):
        assert (out / name).is_file(), name


def test_every_command_is_byte_identical(small):
    tmp, curves, cfg = small
    runs = []
    for k in range(2):
        d = tmp / f"run{k}"
        assert main(["synth", "--spec", str(tmp / "spec.json"), "--out-dir", str(d / "syn")]) == 0
        assert main(["classify", "--curves", str(curves), "--out", str(d / "classes.csv")]) == 0
        assert main(["fit", "--curves", str(curves), "--config", cfg, "--out-dir", str(d / "fit")]) == 0
        assert main(["hypersearch", "--curves", str(curves), "--config", cfg, "--out", str(d / "h.json")]) == 0
        runs.append(_tree(d))
    assert runs[0] == runs[1]


def test_threads_do_not_change_output(small, monkeypatch):
    tmp, curves, cfg = small
    assert main(["fit", "--curves", str(curves), "--config", cfg, "--out-dir", str(tmp / "a")]) == 0
    monkeypatch.setenv("CRF_THREADS", "2")
    assert main(["fit", "--curves", str(curves), "--config", cfg, "--out-dir", str(tmp / "b")]) == 0
    assert _tree(tmp / "a") == _tree(tmp / "b")


def test_seed_env_changes_hypersearch(small, monkeypatch):
    tmp, curves, cfg = small
    assert main(["hypersearch", "--curves", str(curves), "--config", cfg, "--out", str(tmp / "a.json")]) == 0
    monkeypatch.setenv("CRF_SEED", "11")
    assert main(["hypersearch", "--curves", str(curves), "--config", cfg, "--out", str(tmp / "b.json")]) == 0
    a, b = formats.read_json(tmp / "a.json"), formats.read_json(tmp / "b.json")
    assert [r["seed"] for r in a["runs"]] == [0, 1]
    assert [r["seed"] for r in b["runs"]] == [11, 12]


def test_missing_and_malformed_inputs(tmp_path, capsys):
    assert main(["synth", "--spec", str(tmp_path / "nope.json"), "--out-dir", str(tmp_path / "o")]) == 1
    assert "error:" in capsys.readouterr().err
    bad = tmp_path / "bad.csv"
    bad.write_text("site_id,contrast,response,n_trials\ns,0,oops,1\n")
    assert main(["fit", "--curves", str(bad), "--out-dir", str(tmp_path / "f")]) == 1
    assert "bad.csv:2" in capsys.readouterr().err
    assert not (tmp_path / "f").exists()


def test_unknown_config_key(small, capsys):
    tmp, curves, _ = small
    cfg = _write_json(tmp / "bad.json", {"models": {"neurons": 3}})
    assert main(["fit", "--curves", str(curves), "--config", cfg, "--out-dir", str(tmp / "f")]) == 1
    assert "neurons" in capsys.readouterr().err


def test_hypersearch_needs_supersaturating(tmp_path, capsys):
    spec = _write_json(tmp_path / "s.json", {"kind": "linear", "n_curves": 2, "noise_sd": 0.0})
    main(["synth", "--spec", spec, "--out-dir", str(tmp_path / "o")])
    assert main(["hypersearch", "--curves", str(tmp_path / "o" / "curves.csv"),
                 "--out", str(tmp_path / "h.json")]) == 1
    assert "supersaturating" in capsys.readouterr().err


def test_version(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert capsys.readouterr().out.startswith("crf ")
