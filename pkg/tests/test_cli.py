import csv

import numpy as np
import pytest

from ortlrr.cli import main
from ortlrr.tensor_io import read_tensor, write_tensor


def _run(capsys, *argv):
    rc = main(list(argv))
    out = capsys.readouterr().out
    return rc, out


def test_synth_solve_cluster_eval_roundtrip(tmp_path, capsys):
    work = str(tmp_path)
    rc, out = _run(capsys, "synth", "--n1", "12", "--n3", "4",
                   "--clusters", "3", "--rho", "0.2", "--seed", "0",
                   "--out", work)
    assert rc == 0 and "wrote instance" in out
    X = read_tensor(f"{work}/X.t3b")
    assert X.shape == (12, 36, 4)

    rc, out = _run(capsys, "solve", "--input", f"{work}/X.t3b",
                   "--alpha", "4", "--max-iters", "300", "--out", work)
    assert rc == 0 and "solved in" in out
    Z = read_tensor(f"{work}/Z.t3b")
    E = read_tensor(f"{work}/E.t3b")
    assert Z.shape == (36, 36, 4) and E.shape == X.shape
    with open(f"{work}/trace.csv") as fh:
        rows = list(csv.reader(fh))
    assert len(rows) >= 2 and len(rows[1]) == 5

    rc, out = _run(capsys, "cluster", "--z", f"{work}/Z.t3b",
                   "--e", f"{work}/E.t3b", "--clusters", "3",
                   "--seed", "0", "--out", work)
    assert rc == 0 and "outliers detected" in out

    rc, out = _run(capsys, "eval", "--pred", f"{work}/pred_labels.csv",
                   "--truth", f"{work}/labels.csv")
    assert rc == 0
    assert "acc=" in out and "nmi=" in out and "pur=" in out


def test_exp_writes_metrics_csv(tmp_path, capsys):
    work = str(tmp_path)
    rc, out = _run(capsys, "exp", "--n1", "10", "--n3", "4",
                   "--clusters", "2", "--rho", "0.1", "--seeds", "0,1",
                   "--max-iters", "200", "--out", work)
    assert rc == 0 and "metrics written" in out
    with open(f"{work}/metrics.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0][0] == "seed"
    assert [r[0] for r in rows[1:]] == ["0", "1", "mean"]


def test_solve_with_mask_file_and_ewzf(tmp_path, capsys):
    work = str(tmp_path)
    _run(capsys, "synth", "--n1", "8", "--n3", "3", "--clusters", "2",
         "--rho", "0.1", "--seed", "1", "--out", work)
    X = read_tensor(f"{work}/X.t3b")
    rng = np.random.default_rng(0)
    bits = (rng.random(X.shape) < 0.9).astype(float)
    write_tensor(bits, f"{work}/mask.t3b")
    rc, out = _run(capsys, "solve", "--input", f"{work}/X.t3b",
                   "--mask", f"{work}/mask.t3b", "--solver", "ewzf-l21",
                   "--alpha", "30", "--transform", "dct",
                   "--max-iters", "150", "--out", work)
    assert rc == 0 and "solved in" in out
    with open(f"{work}/trace.csv") as fh:
        rows = list(csv.reader(fh))
    assert len(rows[1]) == 6  # missing-data loop tracks six residuals


def test_solve_rejects_mask_with_complete_solver(tmp_path, capsys):
    work = str(tmp_path)
    _run(capsys, "synth", "--n1", "6", "--n3", "2", "--clusters", "2",
         "--rho", "0.1", "--seed", "2", "--out", work)
    X = read_tensor(f"{work}/X.t3b")
    write_tensor(np.ones(X.shape), f"{work}/mask.t3b")
    with pytest.raises(SystemExit):
        main(["solve", "--input", f"{work}/X.t3b", "--mask",
              f"{work}/mask.t3b", "--solver", "ortlrr", "--out", work])


def test_config_file_fills_unset_flags(tmp_path, capsys):
    work = str(tmp_path)
    cfg = tmp_path / "exp.cfg"
    cfg.write_text("n1 = 10  # small\nn3 = 4\nclusters = 2\nrho = 0.1\n"
                   "seed = 3\ntransform = dct\n")
    rc, out = _run(capsys, "synth", "--config", str(cfg), "--out", work)
    assert rc == 0
    assert read_tensor(f"{work}/X.t3b").shape == (10, 20, 4)
    # explicit flag wins over the file
    rc, out = _run(capsys, "synth", "--config", str(cfg), "--n1", "8",
                   "--out", work)
    assert read_tensor(f"{work}/X.t3b").shape == (8, 16, 4)


def test_bad_config_line_raises(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("just some words\n")
    with pytest.raises(ValueError):
        main(["synth", "--config", str(cfg), "--out", str(tmp_path)])


def test_prox_check_passes(capsys):
    rc, out = _run(capsys, "prox-check", "--cases", "25", "--seed", "0")
    assert rc == 0
    assert "PASS" in out
