import csv
import json
import math
import shutil
import subprocess
import sys

import numpy as np
import pytest

from conftest import BENCH
from rmsc import SyntheticSpec
from rmsc.cli import UsageError, cmd_gen, cmd_trace, main
from rmsc.dataset import load_dataset
from rmsc.experiment import ExperimentConfig
from rmsc.reports import validate_csv, validate_report


@pytest.fixture(scope="module")
def data(tmp_path_factory):
    root = tmp_path_factory.mktemp("data")
    spec = SyntheticSpec(3, 10, 3, (20, 20), noise_sigma=0.02, outlier_fraction=0.1,
                         outlier_views=(0,), seed=7)
    return cmd_gen(spec, root / "ds")


def _read(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_gen_writes_loadable_deterministic_dataset(tmp_path, capsys):
    args = ["gen", "--clusters", "2", "--per-cluster", "5", "--subspace-dim", "2",
            "--ambient-dims", "6,7", "--outlier-fraction", "0.2", "--outlier-views", "1", "--seed", "7"]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--out", str(tmp_path / "b")]) == 0
    assert capsys.readouterr().out.strip().endswith("manifest.json")
    for name in ("view0.csv", "view1.csv", "labels.txt", "manifest.json", "outliers.txt"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    ds = load_dataset(tmp_path / "a" / "manifest.json")
    assert len((tmp_path / "a" / "labels.txt").read_text().splitlines()) == ds.n_samples == 10
    assert len((tmp_path / "a" / "outliers.txt").read_text().split()) == 2


@pytest.mark.parametrize("method", ["RMSC", "RMSC_WV", "SSC_BSV", "SSC_AVG", "SC_BSV"])
def test_fit_every_method(data, tmp_path, method):
    out = tmp_path / method
    assert main(["fit", "--manifest", str(data), "--method", method, "--out", str(out),
                 "--restarts", "4"]) == 0
    report = json.loads((out / "report.json").read_text())
    validate_report(report)
    assert report["method"] == method
    assert len(report["evaluation"]["per_run_accuracy"]) == 4
    assert len(report["labels"]) == 30
    assert validate_csv(out / "metrics.csv") == 4
    assert validate_csv(out / "labels.csv") == 30
    if method in ("SSC_BSV", "SC_BSV"):
        assert report["selected_view"] in report["dataset"]["view_names"]
        assert len(report["per_view"]) == 2
    if method == "RMSC":
        assert report["iterations"] == len(report["objective_trace"])
        assert len(report["weight_summary"]["per_view_mean"]) == 2


def test_fit_clean_data_perfect(tmp_path):
    manifest = cmd_gen(SyntheticSpec(3, 20, 5, (60, 60), seed=1), tmp_path / "clean")
    assert main(["fit", "--manifest", str(manifest), "--out", str(tmp_path / "o")]) == 0
    assert json.loads((tmp_path / "o" / "report.json").read_text())["evaluation"]["accuracy"] == 1.0


def test_fit_logs_one_factorization_per_view(data, tmp_path, caplog):
    import logging
    with caplog.at_level(logging.DEBUG, logger="rmsc.solver"):
        assert main(["fit", "--manifest", str(data), "--out", str(tmp_path), "--restarts", "2"]) == 0
    hits = [r for r in caplog.records if "computed Gram matrix and inverse" in r.getMessage()]
    assert len(hits) == 2


def test_record_timing_is_opt_in(data, tmp_path):
    main(["fit", "--manifest", str(data), "--out", str(tmp_path / "a"), "--restarts", "2"])
    main(["fit", "--manifest", str(data), "--out", str(tmp_path / "b"), "--restarts", "2",
          "--record-timing"])
    assert json.loads((tmp_path / "a" / "report.json").read_text())["wall_clock_seconds"] is None
    assert json.loads((tmp_path / "b" / "report.json").read_text())["wall_clock_seconds"] > 0


def test_config_file_and_flag_precedence(data, tmp_path):
    cfg = {"method": "RMSC", "dataset_manifest": str(data), "output_dir": str(tmp_path / "c"),
           "solver": {"lambda": 0.5, "beta": 0.02}, "spectral": {"kmeans_restarts": 3}}
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    assert main(["fit", "--config", str(path), "--beta", "0.05"]) == 0
    hp = json.loads((tmp_path / "c" / "report.json").read_text())["hyperparameters"]
    assert hp["lambda"] == 0.5 and hp["beta"] == 0.05 and hp["kmeans_restarts"] == 3


def test_config_relative_manifest(data, tmp_path):
    shutil.copytree(data.parent, tmp_path / "ds")
    (tmp_path / "cfg.json").write_text(json.dumps({"dataset_manifest": "ds/manifest.json"}))
    cfg = ExperimentConfig.from_json(tmp_path / "cfg.json")
    assert cfg.dataset_manifest == str(tmp_path / "ds" / "manifest.json")


def test_invalid_config_rejected(tmp_path, capsys):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"solver": {"lambda": 1, "typo": 3}}))
    assert main(["fit", "--config", str(path), "--out", str(tmp_path)]) == 2


def test_missing_manifest_exit_code(tmp_path, capsys):
    missing = tmp_path / "nowhere" / "manifest.json"
    assert main(["fit", "--manifest", str(missing), "--out", str(tmp_path)]) == 2
    assert str(missing) in capsys.readouterr().err


def test_no_manifest_is_usage_error(tmp_path):
    assert main(["fit", "--out", str(tmp_path)]) == 2


def test_bad_hyperparameter_exit_code(data, tmp_path):
    assert main(["fit", "--manifest", str(data), "--out", str(tmp_path), "--lambda", "-1"]) == 2
    assert main(["fit", "--manifest", str(data), "--out", str(tmp_path), "--method", "NOPE"]) == 2


def test_argparse_errors_exit_2(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["bogus"])
    assert exc.value.code == 2


def test_sweep_rows(data, tmp_path):
    out = tmp_path / "s"
    assert main(["sweep", "--manifest", str(data), "--out", str(out), "--restarts", "2",
                 "--lambdas", "0.1,0.1", "--betas", "0.01,0.1"]) == 0
    assert validate_csv(out / "sweep.csv") == 4
    rows = _read(out / "sweep.csv")[1:]
    assert [r[:2] for r in rows] == [["0.1", "0.01"], ["0.1", "0.1"]] * 2
    assert rows[0] == rows[2]


def test_sweep_all_cells_fail(tmp_path, caplog):
    ds_dir = tmp_path / "nolabels"
    cmd_gen(SyntheticSpec(2, 5, 2, (6, 6), seed=2), ds_dir)
    manifest = json.loads((ds_dir / "manifest.json").read_text())
    manifest.pop("labels_path")
    (ds_dir / "manifest.json").write_text(json.dumps(manifest))
    out = tmp_path / "s"
    assert main(["sweep", "--manifest", str(ds_dir / "manifest.json"), "--out", str(out),
                 "--restarts", "2", "--lambdas", "0.1,1", "--betas", "0.1,1"]) == 0
    rows = _read(out / "sweep.csv")[1:]
    assert len(rows) == 4 and all(r[2:] == ["nan"] * 4 for r in rows)
    assert any("every sweep cell failed" in r.getMessage() for r in caplog.records)


def test_sweep_empty_grid(data, tmp_path):
    assert main(["sweep", "--manifest", str(data), "--out", str(tmp_path),
                 "--lambdas", "", "--betas", "0.1"]) == 2


def test_trace(data, tmp_path):
    out = tmp_path / "t"
    assert main(["trace", "--manifest", str(data), "--out", str(out), "--restarts", "2"]) == 0
    rows = _read(out / "trace.csv")
    report = {}
    assert main(["fit", "--manifest", str(data), "--out", str(out), "--restarts", "2"]) == 0
    report = json.loads((out / "report.json").read_text())
    assert validate_csv(out / "trace.csv") == report["iterations"]
    vals = [float(r[1]) for r in rows[1:]]
    assert all(b <= a + 1e-9 for a, b in zip(vals, vals[1:]))


def test_trace_rejects_untraced_method(data, tmp_path):
    assert main(["trace", "--manifest", str(data), "--out", str(tmp_path),
                 "--method", "SSC_AVG"]) == 2
    with pytest.raises(UsageError):
        cmd_trace(ExperimentConfig(method="SC_BSV", dataset_manifest=str(data),
                                   output_dir=str(tmp_path)))


def test_weights_dump(data, tmp_path):
    out = tmp_path / "w"
    assert main(["weights", "--manifest", str(data), "--out", str(out), "--restarts", "2",
                 "--top", "3"]) == 0
    assert validate_csv(out / "weights.csv") == 2
    rows = _read(out / "weights.csv")
    assert len(rows[0]) == 30
    assert all(float(x) > 0 for r in rows[1:] for x in r)
    low = _read(out / "lowest_weights.csv")
    assert validate_csv(out / "lowest_weights.csv") == 6
    assert [int(r[1]) for r in low[1:4]] == [0, 1, 2]
    assert main(["weights", "--manifest", str(data), "--out", str(out), "--method", "RMSC_WV"]) == 2


def test_lowest_weights_recover_outliers(tmp_path):
    recalls = []
    for seed in range(10):
        spec = SyntheticSpec(**BENCH, outlier_views=(0,), seed=seed)
        ds_dir = tmp_path / f"s{seed}"
        cmd_gen(spec, ds_dir)
        out = tmp_path / f"w{seed}"
        assert main(["weights", "--manifest", str(ds_dir / "manifest.json"), "--out", str(out),
                     "--restarts", "1"]) == 0
        outliers = {int(x) for x in (ds_dir / "outliers.txt").read_text().split()}
        low = [int(r[2]) for r in _read(out / "lowest_weights.csv")[1:] if r[0] == "0"]
        recalls.append(len(set(low[:10]) & outliers) / min(10, len(outliers)))
    assert np.mean(recalls) >= 0.8


def test_console_script_runs(tmp_path):
    exe = shutil.which("mvsc")
    cmd = [exe] if exe else [sys.executable, "-m", "rmsc.cli"]
    res = subprocess.run(cmd + ["gen", "--out", str(tmp_path / "g"), "--per-cluster", "4",
                                "--ambient-dims", "8,8", "--subspace-dim", "2"],
                         capture_output=True, text=True)
    assert res.returncode == 0, res.stderr
    assert res.stdout.strip().endswith("manifest.json")
    bad = subprocess.run(cmd + ["fit", "--manifest", str(tmp_path / "x.json"), "--out", str(tmp_path)],
                         capture_output=True, text=True)
    assert bad.returncode == 2 and "x.json" in bad.stderr
