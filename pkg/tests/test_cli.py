import numpy as np
import pytest

from psirmon import cli, monitor, simlab


def write_training_csv(path, n=300, seed=0):
    rng = np.random.default_rng(seed)
    X = simlab.gen_predictors(n, 4, 0.5, rng)
    y = simlab.gen_response(X, "linear", 0.05, rng)
    names = ["a", "b", "c", "d"]
    with open(path, "w") as fh:
        fh.write(",".join(names[:2] + ["y"] + names[2:]) + "\n")
        for row, v in zip(X, y):
            fh.write(",".join(repr(float(u)) for u in (row[0], row[1], v, row[2], row[3])) + "\n")
    return X, y


@pytest.fixture
def fitted(tmp_path):
    data = tmp_path / "train.csv"
    write_training_csv(data)
    model = tmp_path / "model.txt"
    assert cli.main(["fit", str(data), "--response", "y", "--out", str(model)]) == 0
    return tmp_path, model


def test_fit_writes_loadable_model(fitted, capsys):
    _, model = fitted
    m = monitor.load_model(model)
    assert m.columns == ("a", "b", "c", "d")
    assert m.method == "psir" and m.n_train == 300


@pytest.mark.parametrize("method", monitor.METHODS)
def test_fit_prints_summary(tmp_path, capsys, method):
    data = tmp_path / "train.csv"
    write_training_csv(data)
    code = cli.main(["fit", str(data), "--response", "y", "--method", method, "-o", str(tmp_path / "m")])
    out = capsys.readouterr().out
    assert code == 0
    for key in ("direction:", "thetas:", "t2_limit:", "spe_limit:", "combined_limit:"):
        assert key in out


def test_detect_in_control_and_fault(fitted, capsys):
    tmp, model = fitted
    m = monitor.load_model(model)
    clean = tmp / "clean.csv"
    clean.write_text("d,c,b,a\n" + ",".join(repr(float(v)) for v in m.x_mean[::-1]) + "\n")
    report = tmp / "rep.csv"
    assert cli.main(["detect", str(model), str(clean), "--out", str(report)]) == 0
    assert report.read_text().splitlines()[0] == "row,t2,spe,phi,t2_alarm,spe_alarm,phi_alarm"
    faulty = tmp / "faulty.csv"
    faulty.write_text("a,b,c,d\n50,-50,50,-50\n")
    assert cli.main(["detect", str(model), str(faulty)]) == 1
    # the shift is orthogonal to the all-ones loading, so T^2 stays quiet
    assert capsys.readouterr().out.strip().endswith("0,1,1")


def test_detect_empty_file(fitted):
    tmp, model = fitted
    empty = tmp / "empty.csv"
    empty.write_text("a,b,c,d\n")
    assert cli.main(["detect", str(model), str(empty)]) == 0


def test_bad_csv_names_line_and_column(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("x1,y\n1,2\n3,oops\n")
    assert cli.main(["fit", str(bad), "--response", "y", "-o", str(tmp_path / "m")]) == 2
    err = capsys.readouterr().err
    assert "line 3" in err and "'y'" in err


def test_missing_response_column(tmp_path):
    data = tmp_path / "d.csv"
    write_training_csv(data)
    assert cli.main(["fit", str(data), "--response", "z", "-o", str(tmp_path / "m")]) == 2


def test_numerical_failure_exit_code(tmp_path):
    data = tmp_path / "flat.csv"
    data.write_text("a,b,y\n" + "1,1,0\n1,1,1\n" * 20)
    assert cli.main(["fit", str(data), "--response", "y", "--method", "pls", "-o", str(tmp_path / "m")]) == 3


def test_missing_file_and_bad_args():
    assert cli.main(["detect", "/nonexistent/model", "/nonexistent/data"]) == 2
    assert cli.main(["fit"]) == 2
    assert cli.main(["limits", "--n", "500", "--theta1", "0", "--theta2", "1"]) == 2


def test_limits_output(capsys):
    code = cli.main(["limits", "--n", "500", "--theta1", "4.5", "--theta2", "2.25", "--theta3", "1.125"])
    out = dict(line.split(": ") for line in capsys.readouterr().out.strip().splitlines())
    assert code == 0
    assert float(out["t2_limit"]) == pytest.approx(6.6993078086307465, rel=1e-9)
    assert float(out["spe_limit_box"]) == pytest.approx(monitor.spe_limit_box(4.5, 2.25, 0.01), rel=1e-9)
    assert "spe_limit_jm" in out and "combined_limit" in out


def test_simulate_writes_csv(tmp_path, capsys):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("n_train = 60\nn_faulty = 10\nn_directions = 2\nn_reps = 1\nfault_magnitudes = 0, 12\nseed = 5\n")
    out = tmp_path / "t.csv"
    assert cli.main(["simulate", str(cfg), "--out", str(out), "--threads", "1"]) == 0
    assert out.read_text().startswith("f,method,mean_pct,std_pct,n_cells\n")


def test_simulate_without_seed_reports_it(tmp_path, capsys):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("n_train = 60\nn_faulty = 10\nn_directions = 1\nn_reps = 1\nfault_magnitudes = 0\n")
    assert cli.main(["simulate", str(cfg), "--threads", "1"]) == 0
    assert "seed: " in capsys.readouterr().err


def test_simulate_bad_config(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("n_train = 1\nseed = 1\n")
    assert cli.main(["simulate", str(cfg)]) == 2
    assert cli.main(["simulate", str(tmp_path / "missing.cfg")]) == 2
