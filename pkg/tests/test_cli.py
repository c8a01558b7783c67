import json
import math
import subprocess
import sys

import numpy as np
import pytest

from extremal_pca import cli
from extremal_pca.simulate import Model, ModelSpec, sample
from extremal_pca.spectrum import read_scree_csv


@pytest.fixture
def data_csv(tmp_path):
    spec = ModelSpec(Model.Directional, d=8, n=1000, p_star=2, spike_values=(20.0, 10.0))
    x = sample(spec, np.random.default_rng(0))
    path = tmp_path / "x.csv"
    header = ",".join(f"v{i}" for i in range(8))
    np.savetxt(path, x, delimiter=",", header=header, comments="")
    return path


def run(argv, capsys):
    code = cli.main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_estimate_csv_table(data_csv, capsys):
    code, out, err = run(["estimate", "--input", data_csv, "--k", "100"], capsys)
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith("# config-hash=")
    assert lines[1] == "k,100" and lines[2] == "c,0.0800" and lines[3] == "regime,fixed"
    assert lines[4].startswith("aic,") and int(lines[4].split(",")[1]) >= 2
    assert lines[5] == "bic,2"
    assert "config-hash:" in err


def test_estimate_k_grid_json(data_csv, capsys):
    code, out, _ = run(["estimate", "--input", data_csv, "--k-grid", "0.05,100,0.3",
                        "--format", "json", "--frechet-margins"], capsys)
    assert code == 0
    data = json.loads(out)
    assert [r["k"] for r in data["reports"]] == [50, 100, 300]
    first = data["reports"][0]
    assert first["n"] == 1000 and first["d"] == 8 and first["regime"] == "fixed"
    assert set(first["p_hat"]) == {"aic", "bic"}
    assert len(first["curves"][0]["values"]) == 6


def test_estimate_star_regime_and_explicit_criterion(tmp_path, capsys):
    spec = ModelSpec(Model.Directional, d=40, n=400, p_star=1, spike_values=30.0)
    path = tmp_path / "wide.csv"
    np.savetxt(path, sample(spec, np.random.default_rng(1)), delimiter=",")
    code, out, _ = run(["estimate", "--input", path, "--k", "20"], capsys)
    assert code == 0 and "regime,star" in out
    code, out, _ = run(["estimate", "--input", path, "--k", "20", "--criterion", "bic-star",
                        "--format", "json"], capsys)
    assert json.loads(out)["reports"][0]["p_hat"] == {"bic-star": 1}


def test_estimate_writes_out_file(data_csv, tmp_path, capsys):
    out_path = tmp_path / "report.csv"
    code, out, _ = run(["estimate", "--input", data_csv, "--k", "0.1", "--out", out_path], capsys)
    assert code == 0 and out == ""
    assert out_path.read_text().splitlines()[1] == "k,100"


def test_config_hash_stable_and_sensitive(data_csv, capsys):
    _, a, _ = run(["estimate", "--input", data_csv, "--k", "100"], capsys)
    _, b, _ = run(["estimate", "--input", data_csv, "--k", "100"], capsys)
    _, c, _ = run(["estimate", "--input", data_csv, "--k", "101"], capsys)
    assert a.splitlines()[0] == b.splitlines()[0] != c.splitlines()[0]


@pytest.mark.parametrize("argv,code,msg", [
    (["--k", "0"], 2, "positive"),
    (["--k", "1000"], 2, "k must be < n"),
    (["--k", "8"], 3, "c = 1 excluded"),
    (["--k", "100", "--criterion", "aic-star"], 3, "regime mismatch"),
    (["--k", "100", "--q", "7"], 2, "must lie in"),
])
def test_estimate_error_codes(data_csv, capsys, argv, code, msg):
    got, _, err = run(["estimate", "--input", data_csv] + argv, capsys)
    assert got == code
    assert msg in err


def test_unreadable_input(tmp_path, capsys):
    code, _, err = run(["estimate", "--input", tmp_path / "missing.csv", "--k", "10"], capsys)
    assert code == 2 and "cannot read" in err


def test_degenerate_data_is_numeric_error(tmp_path, capsys):
    # every row on one ray: the angular covariance is zero
    path = tmp_path / "ray.csv"
    np.savetxt(path, np.outer(np.arange(1, 51), [1.0, 2.0, 3.0, 4.0]), delimiter=",")
    code, _, err = run(["estimate", "--input", path, "--k", "20"], capsys)
    assert code == 3 and "nonpositive" in err


def test_scree_round_trip(data_csv, tmp_path, capsys):
    stem = tmp_path / "scree"
    code, _, _ = run(["scree", "--input", data_csv, "--k", "100", "--out", stem], capsys)
    assert code == 0
    scaled, lam1 = read_scree_csv(tmp_path / "scree_scaled.csv")
    incs, lam1b = read_scree_csv(tmp_path / "scree_increments.csv")
    assert lam1 == lam1b > 0
    assert scaled.size == 7 and incs.size == 6
    assert scaled[0] == 1.0
    np.testing.assert_allclose(incs, scaled[:-1] - scaled[1:], atol=1e-15)


def test_scree_stdout(data_csv, capsys):
    code, out, _ = run(["scree", "--input", data_csv, "--k", "100"], capsys)
    assert code == 0
    assert out.count("index,value") == 2


def test_simulate_writes_csv_and_summary(tmp_path, capsys):
    spec = ModelSpec(Model.SpikedAngularGaussian, d=10, n=600, p_star=2, spike_values=(9.0, 4.0), k=0.25)
    out = tmp_path / "runs.csv"
    code, _, _ = run(["simulate", "--model-spec", spec.to_json(), "--reps", "5", "--seed", "3",
                      "--out", out], capsys)
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("# config-hash=") and lines[1] == "replication,kind,p_hat"
    assert len(lines) == 2 + 5 * 2
    summary = json.loads((tmp_path / "runs.summary.json").read_text())
    assert summary["spec"]["seed"] == 3 and summary["replications"] == 5
    assert summary["config_hash"] == lines[0].split("=", 1)[1]


def test_simulate_spec_from_file_and_env_seed(tmp_path, capsys, monkeypatch):
    spec = ModelSpec(Model.Directional, d=6, n=300, p_star=1, spike_values=10.0, k=0.2)
    path = tmp_path / "spec.json"
    path.write_text(spec.to_json())
    monkeypatch.setenv(cli.SEED_ENV, "17")
    code, out, _ = run(["simulate", "--model-spec", path, "--reps", "2", "--format", "json",
                        "--criterion", "bic"], capsys)
    assert code == 0
    data = json.loads(out)
    assert data["spec"]["seed"] == 17 and list(data["histogram"]) == ["bic"]


def test_simulate_invalid_spec(capsys):
    bad = json.dumps({"model": "directional", "d": 5, "n": 100, "p_star": 5, "spike_values": 2.0})
    code, _, err = run(["simulate", "--model-spec", bad, "--reps", "2"], capsys)
    assert code == 2 and "p_star" in err
    code, _, _ = run(["simulate", "--model-spec", "{oops", "--reps", "2"], capsys)
    assert code == 2


def test_mp_output(capsys):
    code, out, _ = run(["mp", "--c", "0.5", "--x", "1.0", "--alpha", "0.5", "--phi", "3"], capsys)
    assert code == 0
    lines = out.splitlines()
    assert "point_mass=0.0" in lines[0]
    assert lines[1] == "x,density,cdf"
    x, dens, cdf = map(float, lines[2].split(","))
    assert x == 1.0 and dens > 0 and 0 < cdf < 1
    assert lines[3] == "alpha,quantile"
    assert lines[5] == "x,phi_c" and float(lines[6].split(",")[1]) == pytest.approx(3.75)


def test_mp_grid_and_regime_error(capsys):
    code, out, _ = run(["mp", "--c", "2", "--points", "5"], capsys)
    assert code == 0
    rows = out.splitlines()[2:7]
    assert float(rows[0].split(",")[0]) == pytest.approx((1 - math.sqrt(2)) ** 2)
    assert float(rows[-1].split(",")[2]) == pytest.approx(1.0)
    code, _, err = run(["mp", "--c", "1"], capsys)
    assert code == 3 and "c = 1 excluded" in err


def test_gap_grid(capsys):
    code, out, _ = run(["gap", "--xi", "1.5", "3", "20", "--c", "0.75", "2"], capsys)
    assert code == 0
    lines = out.splitlines()
    assert lines[1] == "xi,c,distant,condition,margin,satisfied"
    rows = [ln.split(",") for ln in lines[2:]]
    assert len(rows) == 6
    by_key = {(float(r[0]), float(r[1])): r for r in rows}
    assert by_key[(1.5, 0.75)][3] == "inapplicable" and by_key[(1.5, 0.75)][5] == "false"
    assert by_key[(3.0, 0.75)][3] == "gap" and float(by_key[(3.0, 0.75)][4]) == pytest.approx(0.208, abs=5e-4)
    assert by_key[(20.0, 2.0)][3] == "modified-gap" and by_key[(20.0, 2.0)][5] == "true"


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "extremal_pca.cli", "gap", "--xi", "3", "--c", "0.5"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "config-hash:" in proc.stderr and proc.stdout.count("\n") == 3


def test_argparse_rejects_unknown_criterion(data_csv):
    with pytest.raises(SystemExit) as info:
        cli.main(["estimate", "--input", str(data_csv), "--k", "10", "--criterion", "nope"])
    assert info.value.code == 2
