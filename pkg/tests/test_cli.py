import json

import numpy as np
import pytest

from purify import fileio
from purify.cli import ExperimentManifest, generate_random_tridiagonal, main, run_experiment


def test_generate_random_tridiagonal():
    H = generate_random_tridiagonal(2, 9)
    d, e = H.bands
    assert e.tolist() == [1.0] and np.all(np.abs(d) <= 1)
    a = generate_random_tridiagonal(100, 4).bands[0]
    assert np.array_equal(a, generate_random_tridiagonal(100, 4).bands[0])
    with pytest.raises(ValueError):
        generate_random_tridiagonal(1, 0)


def test_tridiag_end_to_end(tmp_path):
    code = main(["--experiment", "tridiag", "--n", "64", "--seed", "1", "--target-k", "0", "5",
                 "--baseline", "--out", str(tmp_path)])
    assert code == 0
    rows = fileio.read_csv(tmp_path / "trace_k0.csv")
    assert float(rows[-1]["sigma_bar"]) <= 1e-10
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert [r["target"] for r in summary["runs"]] == [0, 5]
    assert all(r["converged"] and r["max_log10_r"] < 0 for r in summary["runs"])
    assert "naive" in summary["runs"][0]
    for name in ("matrix.txt", "eigs.txt", "ratios_k5.csv", "trace_naive_k5.csv"):
        assert (tmp_path / name).exists()
    H = fileio.read_matrix(tmp_path / "matrix.txt")
    assert np.array_equal(H.bands[0], generate_random_tridiagonal(64, 1).bands[0])


def test_su2_end_to_end(tmp_path):
    code = main(["--experiment", "su2", "--spins", "4", "--spin-magnitude", "1/2",
                 "--target-l", "0", "--out", str(tmp_path)])
    assert code == 0
    assert sorted(p.name for p in tmp_path.glob("basis_*.vec")) == ["basis_0.vec", "basis_1.vec"]
    assert fileio.read_matrix(tmp_path / "matrix.txt").kind == "sparse"
    assert fileio.read_eigs(tmp_path / "eigs.txt").tolist() == [0, 0, 2, 2, 2, 6]


def test_lyapunov_end_to_end(tmp_path):
    code = main(["--experiment", "lyapunov", "--n", "32", "--steps", "200", "--out", str(tmp_path)])
    assert code == 0
    rows = fileio.read_csv(tmp_path / "lyapunov.csv")
    assert len(rows) == 200 and list(rows[0]) == ["n", "zeta", "lambda"]


def test_forced_failure(tmp_path, capsys):
    code = main(["--experiment", "tridiag", "--n", "64", "--max-iters", "1", "--out", str(tmp_path)])
    assert code == 1
    assert len(fileio.read_csv(tmp_path / "trace_k0.csv")) == 1
    assert json.loads((tmp_path / "summary.json").read_text())["runs"][0]["converged"] is False


def test_stage_error(tmp_path, capsys):
    code = main(["--experiment", "su2", "--spins", "3", "--spin-magnitude", "1/2",
                 "--out", str(tmp_path)])
    assert code == 2
    assert "spin system" in capsys.readouterr().err
    code = main(["--experiment", "su2", "--target-l", "7", "--out", str(tmp_path)])
    assert code == 2 and "target" in capsys.readouterr().err


def test_unknown_experiment():
    with pytest.raises(ValueError):
        ExperimentManifest("other", "out")
    with pytest.raises(SystemExit):
        main(["--experiment", "other", "--out", "x"])


def test_byte_identical_outputs(tmp_path, monkeypatch):
    monkeypatch.setenv("PURIFY_THREADS", "2")
    for name in ("a", "b"):
        m = ExperimentManifest("tridiag", str(tmp_path / name), n=48, seed=2, targets=[0, 7],
                               baseline=True)
        assert run_experiment(m) == 0
    for f in sorted((tmp_path / "a").iterdir()):
        if f.suffix in (".csv", ".txt"):
            assert f.read_bytes() == (tmp_path / "b" / f.name).read_bytes()
