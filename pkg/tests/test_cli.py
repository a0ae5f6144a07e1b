import csv
import io
import json

import numpy as np
import pytest

from nn2poly.cli import DIAG_COLUMNS, GROWTH_COLUMNS, main
from nn2poly.mlp import MlpModel, Dataset, forward, random_constrained_init, save_csv, save_model
from nn2poly.polyalg import Polynomial
from nn2poly.simulation import SIM_COLUMNS


@pytest.fixture(autouse=True)
def _cache_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("NN2POLY_CACHE_DIR", str(tmp_path / "cache"))
    (tmp_path / "cache").mkdir()


@pytest.fixture
def tanh_model(tmp_path):
    model = random_constrained_init([5, 50, 50, 50, 1], ["tanh"] * 3 + ["linear"], seed=0)
    path = tmp_path / "w.json"
    save_model(model, path)
    return model, path


@pytest.fixture
def square_model(tmp_path):
    W1 = np.array([[0.0, 0.5], [1.0, 1.0], [1.0, -1.0]])
    W2 = np.array([[1.0], [2.0], [-1.0]])
    model = MlpModel(2, [W1, W2], ["poly:0,0,1", "linear"])
    path = tmp_path / "sq.json"
    save_model(model, path)
    return model, path


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def read_csv(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_partitions_lists_eleven(capsys):
    code, out, _ = run(capsys, "partitions", "1,1,2,3")
    assert code == 0
    lines = out.splitlines()
    assert len(lines) == 11
    assert lines[0] == "{1,1,2,3}"
    assert "{1},{1},{2},{3}" in lines


def test_partitions_filtered_and_vectors(capsys):
    _, out, _ = run(capsys, "partitions", "1,1,2,3", "--n", 2, "--q", 2)
    assert sorted(out.splitlines()) == ["{1,1},{2,3}", "{1,2},{1,3}"]
    _, out, _ = run(capsys, "partitions", "1,1,2,3", "--vectors")
    assert out.splitlines()[0] == "(2,1,1)"


@pytest.mark.parametrize("bad", ["a,b", "0,1", ","])
def test_partitions_bad_input(capsys, bad):
    code, _, err = run(capsys, "partitions", bad)
    assert code == 1 and "error" in err


def test_extract_defaults(capsys, tmp_path, tanh_model):
    _, path = tanh_model
    out_path = tmp_path / "poly.json"
    code, _, _ = run(capsys, "extract", "--weights", path, "--out", out_path)
    assert code == 0
    P = Polynomial.from_json(out_path.read_text())
    assert P.order <= 3 and P.p == 5
    code, out, _ = run(capsys, "extract", "--weights", path)
    assert Polynomial.from_json(out) == P


def test_extract_csv(capsys, square_model):
    _, path = square_model
    code, out, _ = run(capsys, "extract", "--weights", path, "--format", "csv", "--q-max", "none")
    rows = read_csv(out)
    assert code == 0
    assert {r["term"]: float(r["coef"]) for r in rows} == pytest.approx(
        {"0": 0.75, "1": -1.0, "2": 1.0, "1,1": 1.0, "1,2": 6.0, "2,2": 1.0}
    )


def test_extract_top_k_stable(capsys, tmp_path, tanh_model):
    _, path = tanh_model
    outs = [run(capsys, "extract", "--weights", path, "--top-k", 5)[1] for _ in range(2)]
    assert outs[0] == outs[1]
    rows = read_csv(outs[0])
    assert [int(r["rank"]) for r in rows] == [1, 2, 3, 4, 5]
    mags = [abs(float(r["coef"])) for r in rows]
    assert mags == sorted(mags, reverse=True)
    code, _, err = run(capsys, "extract", "--weights", path, "--top-k", 0)
    assert code == 1


def test_extract_verify(capsys, square_model, tanh_model):
    _, path = square_model
    code, _, err = run(capsys, "extract", "--weights", path, "--verify", "--q-max", "none")
    assert code == 0
    diff = float(err.strip().split("max_abs_diff=")[1])
    assert diff <= 1e-12
    code, _, err = run(capsys, "extract", "--weights", tanh_model[1], "--verify")
    assert code == 1 and "--verify" in err


def test_extract_errors(capsys, tmp_path):
    code, _, err = run(capsys, "extract", "--weights", tmp_path / "missing.json")
    assert code == 1 and "not found" in err
    bad = tmp_path / "bad.json"
    bad.write_text("{\n  oops")
    code, _, err = run(capsys, "extract", "--weights", bad)
    assert code == 1 and "line 2" in err


def test_config_file_precedence(capsys, tmp_path, square_model):
    _, path = square_model
    cfg = tmp_path / "c.toml"
    cfg.write_text('q-max = 1\nformat = "csv"\n')
    _, out, _ = run(capsys, "--config", cfg, "extract", "--weights", path)
    rows = read_csv(out)
    assert {r["term"] for r in rows} <= {"0", "1", "2"}
    _, out, _ = run(capsys, "--config", cfg, "extract", "--weights", path, "--q-max", 2, "--format", "json")
    assert Polynomial.from_json(out).order == 2
    cfg.write_text("q-max = [")
    code, _, _ = run(capsys, "--config", cfg, "extract", "--weights", path)
    assert code == 1


def test_compare(capsys, tmp_path, tanh_model):
    model, path = tanh_model
    X = np.random.default_rng(0).uniform(-1, 1, size=(200, 5))
    y = forward(model, X).ravel() + 0.01
    data_path = tmp_path / "d.csv"
    save_csv(Dataset(X, y), data_path)
    pred_path = tmp_path / "pred.csv"
    code, out, _ = run(capsys, "compare", "--weights", path, "--data", data_path, "--pred-out", pred_path)
    assert code == 0
    report = json.loads(out)
    assert "timing" not in report
    m = report["metrics"]
    assert m["mse_nn_vs_y"] == pytest.approx(1e-4)
    assert m["mse_poly_vs_nn"] < 1e-3 * np.var(y)
    assert len(read_csv(pred_path.read_text())) == 200
    # deterministic report without --timing
    assert run(capsys, "compare", "--weights", path, "--data", data_path)[1] == out
    _, out, _ = run(capsys, "compare", "--weights", path, "--data", data_path, "--timing")
    assert set(json.loads(out)["timing"]) == {"cache_build_s", "transform_s", "evaluation_s"}


def test_compare_dimension_mismatch(capsys, tmp_path, tanh_model):
    data_path = tmp_path / "d.csv"
    save_csv(Dataset(np.zeros((3, 2)), np.zeros(3)), data_path)
    code, _, err = run(capsys, "compare", "--weights", tanh_model[1], "--data", data_path)
    assert code == 1 and "columns" in err


def test_simulate(capsys):
    code, out, _ = run(
        capsys, "simulate", "--p", 3, "--interactions", 2, "--layers", "1,2", "--width", 8,
        "--seed", "0,1", "--samples", 100, "--epochs", 5,
    )
    assert code == 0
    rows = read_csv(out)
    assert tuple(rows[0]) == SIM_COLUMNS
    assert [(r["layers"], r["seed"]) for r in rows] == [("1", "0"), ("1", "1"), ("2", "0"), ("2", "1")]
    assert all(float(r["mse_poly_vs_nn"]) >= 0 for r in rows)
    again = run(
        capsys, "simulate", "--p", 3, "--interactions", 2, "--layers", "1,2", "--width", 8,
        "--seed", "0,1", "--samples", 100, "--epochs", 5,
    )[1]
    assert again == out


def test_simulate_requires_seed(capsys):
    code, _, err = run(capsys, "simulate")
    assert code == 1 and "--seed" in err


def test_diagnose(capsys, tmp_path, tanh_model):
    model, path = tanh_model
    data_path = tmp_path / "d.csv"
    X = np.random.default_rng(0).uniform(-1, 1, size=(300, 5))
    save_csv(Dataset(X, np.zeros(300)), data_path)
    code, out, _ = run(capsys, "diagnose", "--weights", path, "--data", data_path, "--bins", 10)
    rows = read_csv(out)
    assert code == 0 and tuple(rows[0]) == DIAG_COLUMNS
    assert len(rows) == 4 * 10
    layer1 = [r for r in rows if r["layer"] == "1"]
    assert float(layer1[0]["frac_abs_gt_1"]) == 0.0
    assert sum(int(r["count"]) for r in layer1) == 300 * 50


def test_report_growth(capsys):
    code, out, _ = run(capsys, "report-growth", "--p", "3,10", "--q", "2,3")
    rows = read_csv(out)
    assert code == 0 and tuple(rows[0]) == GROWTH_COLUMNS
    by = {(int(r["p"]), int(r["Q"])): r for r in rows}
    assert int(by[(3, 2)]["n_terms"]) == 10
    assert int(by[(3, 3)]["n_canonical_classes"]) == int(by[(10, 3)]["n_canonical_classes"]) == 6


def test_report_growth_guard(capsys):
    code, _, err = run(capsys, "report-growth", "--p", 100, "--q", 2)
    assert code == 1 and "--force" in err


def test_argparse_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["extract"])
    assert exc.value.code == 2
