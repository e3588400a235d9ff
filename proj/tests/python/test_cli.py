"""End-to-end checks of the command-line surface. The binary path comes from
the SSVM_CLI environment variable (set by ctest)."""

import json
import os
import subprocess

import pytest

CLI = os.environ.get("SSVM_CLI")

pytestmark = pytest.mark.skipif(not CLI, reason="SSVM_CLI not set")


def run(*args, expect=0):
    proc = subprocess.run([CLI, *args], capture_output=True, text=True)
    assert proc.returncode == expect, proc.stderr
    return proc


@pytest.fixture(scope="module")
def data_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "pipe.svmtxt"
    run(
        "synth", "--n", "1000", "--beams", "24", "--radius", "4", "--noise", "0.4",
        "--defect-rate", "0.4", "--depth-min", "1", "--depth-max", "2",
        "--width-min", "4", "--width-max", "10", "--seed", "7", "--out", str(path),
    )
    assert sum(1 for _ in open(path)) == 1000
    return str(path)


def test_usage_error_exit_code():
    proc = subprocess.run([CLI, "no-such-command"], capture_output=True, text=True)
    assert proc.returncode == 2


def test_data_error_exit_code(tmp_path):
    bad = tmp_path / "bad.svmtxt"
    bad.write_text("+1 nonsense\n")
    proc = subprocess.run(
        [CLI, "train", "--algo", "smo", "--data", str(bad)], capture_output=True, text=True
    )
    assert proc.returncode == 3


def test_nonconvergence_exit_code(data_file):
    proc = subprocess.run(
        [CLI, "train", "--algo", "smo", "--data", data_file, "--max-passes", "0"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 4


def test_train_each_algo(data_file, tmp_path):
    for algo in ("isvm", "lasvm", "smo"):
        model = tmp_path / f"{algo}.model.json"
        metrics = tmp_path / f"{algo}.metrics.csv"
        run(
            "train", "--algo", algo, "--data", data_file, "--C", "100",
            "--kernel", "rbf?gamma=auto", "--epoch-size", "200", "--finish-every", "5",
            "--seed", "1", "--out-model", str(model), "--metrics-csv", str(metrics),
        )
        header, row = metrics.read_text().splitlines()
        assert header == "accuracy,log_loss,roc_auc,f1"
        accuracy = float(row.split(",")[0])
        assert accuracy > 0.9
        payload = json.loads(model.read_text())
        assert payload["format"] == "ssvm-model"


def test_evaluate_model_file(data_file, tmp_path):
    model = tmp_path / "m.json"
    run("train", "--algo", "smo", "--data", data_file, "--out-model", str(model))
    proc = run("evaluate", "--model", str(model), "--data", data_file)
    assert proc.stdout.startswith("accuracy,log_loss,roc_auc,f1")


def test_stream_resume_matches_uninterrupted(data_file, tmp_path):
    for algo in ("isvm", "lasvm"):
        full_metrics = tmp_path / f"{algo}.full.csv"
        run(
            "stream", "--algo", algo, "--data", data_file, "--seed", "3",
            "--metrics-csv", str(full_metrics),
        )

        ckpt = tmp_path / f"{algo}.ckpt"
        part_metrics = tmp_path / f"{algo}.resumed.csv"
        run(
            "stream", "--algo", algo, "--data", data_file, "--seed", "3",
            "--checkpoint", str(ckpt), "--checkpoint-every", "100", "--stop-after", "517",
        )
        run(
            "resume", "--from", str(ckpt), "--data", data_file,
            "--metrics-csv", str(part_metrics),
        )
        assert part_metrics.read_text() == full_metrics.read_text()


def test_train_is_deterministic(data_file, tmp_path):
    outs = []
    for tag in ("a", "b"):
        model = tmp_path / f"det.{tag}.json"
        metrics = tmp_path / f"det.{tag}.csv"
        run(
            "train", "--algo", "lasvm", "--data", data_file, "--seed", "9",
            "--out-model", str(model), "--metrics-csv", str(metrics),
        )
        outs.append((model.read_bytes(), metrics.read_bytes()))
    assert outs[0] == outs[1]


def test_gridsearch_smoke(data_file, tmp_path):
    grid = tmp_path / "grid.json"
    grid.write_text(json.dumps({
        "C": [1, 100],
        "kernel": ["rbf"],
        "gamma": ["auto"],
        "tau": [0.01],
        "folds": 3,
    }))
    out = tmp_path / "grid.csv"
    run("gridsearch", "--grid", str(grid), "--data", data_file, "--algo", "lasvm",
        "--seed", "5", "--out", str(out))
    lines = out.read_text().splitlines()
    assert lines[0] == "config_id,C,kernel,gamma,tau,mean_val_acc,std_val_acc"
    assert len(lines) == 3


def test_curve(data_file, tmp_path):
    out = tmp_path / "curve.csv"
    run(
        "curve", "--algo", "lasvm", "--data", data_file, "--checkpoints", "100,200,300",
        "--train-frac", "0.5", "--val-frac", "0.2", "--seed", "2", "--out", str(out),
    )
    lines = out.read_text().splitlines()
    assert lines[0] == "n_samples,seconds,val_acc,test_acc,sv_count"
    assert len(lines) == 4
    assert [int(l.split(",")[0]) for l in lines[1:]] == [100, 200, 300]
