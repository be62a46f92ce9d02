import csv
import io
import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from kronsensus.cli import UsageError, main, parse_generator
from kronsensus.matlin import read_matrix, write_matrix

GOLDEN = Path(__file__).parent / "golden"


def run(*args, cwd=None, env=None):
    return subprocess.run([sys.executable, "-m", "kronsensus", *args], capture_output=True, text=True,
                          cwd=cwd, env=env)


def assert_close(got, want, path="$"):
    if isinstance(want, dict):
        assert set(got) == set(want), path
        for key in want:
            assert_close(got[key], want[key], f"{path}.{key}")
    elif isinstance(want, list):
        assert len(got) == len(want), path
        for i, (g, w) in enumerate(zip(got, want)):
            assert_close(g, w, f"{path}[{i}]")
    elif isinstance(want, float) and not isinstance(want, bool):
        assert got == pytest.approx(want, rel=1e-9, abs=1e-12), path
    else:
        assert got == want, path


def csv_rows(text):
    return list(csv.reader(io.StringIO(text)))


def assert_csv_close(got, want):
    g, w = csv_rows(got), csv_rows(want)
    assert g[0] == w[0] and len(g) == len(w)
    for rg, rw in zip(g[1:], w[1:]):
        for a, b in zip(rg, rw):
            try:
                assert float(a) == pytest.approx(float(b), rel=1e-9, abs=1e-12)
            except ValueError:
                assert a == b


# --- golden files ----------------------------------------------------------------------


@pytest.mark.parametrize("golden,args", [
    ("spectrum_cayley81.json", ["spectrum", "--family", "cayley", "--group", "81", "--support", "-1,0,1"]),
    ("cost_deadbeat9.json", ["cost", "--family", "kronecker", "--n", "3", "--k", "2",
                             "--seed-matrix", "deadbeat", "--gamma", "1"]),
    ("validate_torus.json", ["validate", "--family", "cayley", "--group", "3x3",
                             "--generator", "uniform:(0,0),(1,0),(0,1)"]),
])
def test_json_golden(golden, args):
    cp = run(*args)
    assert cp.returncode == 0, cp.stderr
    assert_close(json.loads(cp.stdout), json.loads((GOLDEN / golden).read_text()))


@pytest.mark.parametrize("golden,args", [
    ("compare_n3.csv", ["compare", "--n", "3", "--k-range", "2,3,4", "--format", "csv"]),
    ("sweep_deadbeat81.csv", ["cost", "--family", "kronecker", "--n", "3", "--k", "4",
                              "--gammas", "0,0.1,1,10", "--format", "csv"]),
])
def test_csv_golden(golden, args):
    cp = run(*args)
    assert cp.returncode == 0, cp.stderr
    assert_csv_close(cp.stdout, (GOLDEN / golden).read_text())


def test_golden_values_are_the_known_ones():
    doc = json.loads((GOLDEN / "cost_deadbeat9.json").read_text())
    assert (doc["j1"], doc["j2"], doc["j"]) == (10.0, 12.0, 22.0)
    spec = json.loads((GOLDEN / "spectrum_cayley81.json").read_text())
    assert spec["ess_radius"] == pytest.approx((1 + 2 * np.cos(2 * np.pi / 81)) / 3, abs=1e-12)


# --- subcommands -----------------------------------------------------------------------


def test_build_then_reuse(tmp_path):
    cp = run("build", "--family", "kronecker", "--n", "3", "--k", "4", "--seed-matrix", "deadbeat",
             "--out-dir", str(tmp_path))
    assert cp.returncode == 0, cp.stderr
    doc = json.loads(cp.stdout)
    assert doc["schema"] == "kronsensus/1" and doc["strategy"]["N"] == 81
    m = read_matrix(tmp_path / "strategy.matrix.txt")
    assert m.shape == (81, 81)
    cp = run("spectrum", "--strategy", str(tmp_path / "strategy.json"))
    assert json.loads(cp.stdout)["ess_radius"] == 0.0


def test_custom_matrix_and_exit_codes(tmp_path):
    good = write_matrix(tmp_path / "good.txt", np.full((3, 3), 1 / 3))
    bad = write_matrix(tmp_path / "bad.txt", np.eye(3))
    assert run("validate", "--family", "custom", "--matrix", str(good), "--nu-limit", "3").returncode == 0
    assert run("validate", "--family", "custom", "--matrix", str(good), "--nu-limit", "2").returncode == 1
    cp = run("validate", "--family", "custom", "--matrix", str(bad))
    assert cp.returncode == 1 and json.loads(cp.stdout)["validation"]["one_simple"] is False
    cp = run("cost", "--family", "custom", "--matrix", str(bad))
    assert cp.returncode == 1 and "undefined" in cp.stderr


def test_seed_matrix_file(tmp_path):
    seed = write_matrix(tmp_path / "a.txt", np.array([[2 / 3, 1 / 3], [1 / 3, 2 / 3]]))
    cp = run("spectrum", "--family", "kronecker", "--k", "3", "--seed-matrix", str(seed))
    assert json.loads(cp.stdout)["ess_radius"] == pytest.approx(3 ** (-1 / 3), abs=1e-12)
    cp = run("spectrum", "--family", "kronecker", "--k", "3", "--seed-matrix", str(seed), "--method", "numeric")
    assert json.loads(cp.stdout)["method"] == "NumericQR"


def test_usage_errors():
    assert run("spectrum", "--family", "cayley", "--group", "3", "--generator", "0:0.5").returncode == 2
    assert run("spectrum", "--family", "kronecker", "--n", "3").returncode == 2
    assert run("frobnicate").returncode == 2
    assert run("validate", "--family", "cayley", "--group", "3x").returncode == 2
    assert run("spectrum", "--family", "kronecker", "--k", "2", "--seed-matrix", "/no/such/file").returncode == 2


def test_simulate(tmp_path):
    out, dis = tmp_path / "traj.csv", tmp_path / "dis.csv"
    cp = run("simulate", "--family", "kronecker", "--n", "3", "--k", "4", "--seed", "3", "--format", "csv",
             "--output", str(out), "--disagreement-output", str(dis))
    assert cp.returncode == 0, cp.stderr
    rows = csv_rows(out.read_text())
    assert rows[0][:2] == ["t", "agent_0"] and len(rows) == 6
    assert csv_rows(dis.read_text())[0] == ["t", "norm2", "norminf"]
    cp = run("simulate", "--family", "kronecker", "--n", "3", "--k", "4", "--trials", "20")
    assert json.loads(cp.stdout)["convergence"]["max"] == 4


def test_simulate_from_file(tmp_path):
    x0 = tmp_path / "x0.txt"
    x0.write_text("1\n2\n3\n6\n")
    cp = run("simulate", "--family", "kronecker", "--n", "2", "--k", "2", "--x0", str(x0))
    doc = json.loads(cp.stdout)
    assert doc["target"] == 3.0 and doc["steps"] == 2


def test_monte_carlo_threads_env(tmp_path):
    import os

    args = ["cost", "--family", "kronecker", "--n", "3", "--k", "2", "--gamma", "1", "--method", "monte-carlo",
            "--trials", "3000", "--seed", "4"]
    a = json.loads(run(*args).stdout)
    b = json.loads(run(*args, env={**os.environ, "KRONSENSUS_THREADS": "3"}).stdout)
    assert a == b
    assert abs(a["j"] - 22) <= 4 * a["std_error"]


def test_replicate_figure(tmp_path):
    cp = run("replicate-figure", "--seed", "5", "--out-dir", str(tmp_path))
    doc = json.loads(cp.stdout)
    assert doc["spread_ratio_ok"] is True
    assert (tmp_path / "kronecker.csv").exists() and (tmp_path / "cayley.csv").exists()


def test_output_file(tmp_path):
    out = tmp_path / "r.json"
    assert main(["spectrum", "--family", "cayley", "--group", "9", "--support", "-1,0,1", "--output", str(out)]) == 0
    assert json.loads(out.read_text())["method"] == "CirculantDFT"


def test_csv_not_available_is_usage_error():
    assert main(["validate", "--family", "cayley", "--group", "5", "--support", "-1,0,1", "--format", "csv"]) == 2


# --- generator parsing -----------------------------------------------------------------


def test_parse_generator_forms():
    assert parse_generator("uniform:-1,0,1") == {-1: 1 / 3, 0: 1 / 3, 1: 1 / 3}
    assert parse_generator("0:0.3334,1:0.3333,-1:0.3333") == {0: 0.3334, 1: 0.3333, -1: 0.3333}
    torus = parse_generator("uniform:(0,0),(1,0),(0,1)")
    assert set(torus) == {(0, 0), (1, 0), (0, 1)}
    assert parse_generator("(0,0):0.5,(1,1):0.5") == {(0, 0): 0.5, (1, 1): 0.5}


@pytest.mark.parametrize("text", ["0:0.5", "uniform:", "0:abc", "foo", "0:0.5,1:0.6"])
def test_parse_generator_rejects(text):
    with pytest.raises(UsageError):
        parse_generator(text)
