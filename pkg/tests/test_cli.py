import io
import json
import os
import subprocess
import sys

import pytest

from conecrit.cli import run


def call(*argv):
    buf = io.StringIO()
    code = run(list(argv), stdout=buf)
    return code, json.loads(buf.getvalue())


def test_pstar_hemisphere():
    code, out = call("pstar", "--dim", "3", "--cap-deg", "90")
    assert code == 0 and out["schema"] == 1
    assert out["result"]["p_star"] == pytest.approx(2.0, abs=1e-4)
    assert out["config"]["cap_deg"] == 90.0


def test_pstar_full_sphere():
    code, out = call("pstar", "--dim", "3", "--full-sphere")
    assert code == 0 and out["result"]["p_star"] == 3.0


@pytest.mark.parametrize("alpha", [-4.0, -10.0])
def test_pstar_constant_ld(alpha):
    code, out = call("pstar", "--matrix", "const-d", "--alpha", str(alpha))
    assert out["result"]["p_star"] == pytest.approx(1 - 2 / alpha, rel=1e-14)


def test_sweep_csv_is_monotone(tmp_path):
    path = tmp_path / "sweep.csv"
    code, out = call("sweep", "--dim", "3", "--cap-deg-range", "30:180:10", "--csv", str(path),
                     "--nodes", "500")
    rows = path.read_text().splitlines()
    assert code == 0 and rows[0] == "theta1_deg,lambda1,alpha_minus,p_star" and len(rows) == 17
    ps = [float(r.split(",")[3]) for r in rows[1:]]
    assert all(b >= a for a, b in zip(ps, ps[1:]))


@pytest.mark.parametrize("argv, code", [
    (["certify-super", "--p", "2.5"], 0),
    (["certify-super", "--p", "1.5"], 1),
    (["certify-super", "--p", "1.5", "--c", "0.1"], 1),
    (["certify-nonexist", "--p", "1.5"], 0),
    (["certify-nonexist", "--p", "2.5"], 2),
    (["certify-critical"], 0),
    (["gbnorm", "--eps", "2"], 0),
    (["radial", "--matrix", "log-d"], 0),
    (["eigen", "--K", "3", "--nodes", "400"], 0),
])
def test_exit_codes(argv, code):
    got, out = call(*argv)
    assert got == code
    assert ("error" in out) == (code == 2)


@pytest.mark.parametrize("argv", [[], ["bogus"], ["pstar", "--cap-deg", "200"],
                                  ["certify-super"], ["pstar", "--dim", "2"],
                                  ["radial"], ["pstar", "--seed", "-1"]])
def test_usage_errors_are_json(argv):
    code, out = call(*argv)
    assert code == 2 and set(out["error"]) == {"type", "message"}


def test_critical_with_zero_eps_fails():
    code, out = call("certify-critical", "--eps", "0")
    assert code == 1 and out["result"]["verdict"] == "fail"


def test_nonconvergence_exit_code(monkeypatch):
    from conecrit import cli
    from conecrit.errors import ConvergenceError

    def boom(*a, **k):
        raise ConvergenceError("stalled")
    monkeypatch.setattr(cli, "exhaustion_solve", boom)
    code, out = call("solve", "--p", "3")
    assert code == 3 and out["error"]["type"] == "ConvergenceError"


def test_solve_writes_csv(tmp_path):
    path = tmp_path / "w.csv"
    code, out = call("solve", "--p", "2.5", "--radii", "10,30,90", "--nodes", "32", "--csv", str(path))
    assert code == 0 and out["result"]["stabilizing"]
    assert path.read_text().startswith("r,theta,w\n")


def _subprocess_run(args, threads):
    env = dict(os.environ, OMP_NUM_THREADS=str(threads), OPENBLAS_NUM_THREADS=str(threads),
               MKL_NUM_THREADS=str(threads))
    return subprocess.run([sys.executable, "-m", "conecrit", *args], capture_output=True,
                          env=env, check=False).stdout


@pytest.mark.parametrize("args", [["certify-nonexist", "--p", "1.7", "--seed", "3"],
                                  ["harnack", "--seed", "11"]])
def test_byte_identical_across_thread_counts(args):
    one, four = _subprocess_run(args, 1), _subprocess_run(args, 4)
    assert b'"schema": 1' in one and one == four
