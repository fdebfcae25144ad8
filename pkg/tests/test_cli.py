import json
import math
import subprocess
import sys

import pytest

from slopt.cli import dumps, run


def _run(capsys, *argv):
    code = run(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_eig_zero(capsys):
    code, out, _ = _run(capsys, "eig", "--potential", "zero", "--count", "2")
    assert code == 0
    res = json.loads(out)
    assert res[0]["lambda"] == pytest.approx(math.pi ** 2, abs=1e-6)
    assert res[1]["lambda"] == pytest.approx(4 * math.pi ** 2, abs=1e-6)


def test_eig_constant_and_file(capsys, tmp_path):
    code, out, _ = _run(capsys, "eig", "--potential", "const:-3", "--count", "1")
    assert code == 0 and json.loads(out)[0]["lambda"] == pytest.approx(math.pi ** 2 + 3, abs=1e-6)
    f = tmp_path / "q.json"
    f.write_text(json.dumps({"kind": "piecewise", "segments": [
        {"start": 0, "stop": 0.5, "kind": "constant", "value": -10},
        {"start": 0.5, "stop": 1, "kind": "zero"}]}))
    code, out, _ = _run(capsys, "eig", "--potential", str(f), "--count", "1")
    assert code == 0 and json.loads(out)[0]["lambda"] == pytest.approx(14.247691628724853, abs=1e-8)


def test_mde_eig(capsys, tmp_path):
    f = tmp_path / "mu.json"
    f.write_text(json.dumps({"atoms": [{"pos": 0.5, "mass": -5.0}]}))
    code, out, _ = _run(capsys, "mde-eig", "--measure", str(f), "--count", "1")
    assert code == 0 and json.loads(out)[0]["lambda"] == pytest.approx(17.747273915378535, abs=1e-6)


def test_critical_csv(capsys, tmp_path):
    csv = tmp_path / "c.csv"
    code, out, _ = _run(capsys, "--grid-n", "1024", "critical", "--p", "3/2", "--r", "1",
                        "--csv", str(csv))
    assert code == 0 and json.loads(out)["p"] == 1.5
    lines = csv.read_text().splitlines()
    assert lines[0] == "t,y,z,q" and len(lines) == 1026


def test_continue_csv(capsys):
    code, out, _ = _run(capsys, "--grid-n", "1024", "continue", "--r", "5", "--p-from", "2",
                        "--p-to", "1.5", "--steps", "3")
    rows = out.splitlines()
    assert code == 0 and rows[0].startswith("p,M,") and len(rows) == 4


def test_maximize_verify_round_trip(capsys, tmp_path):
    js, csv = tmp_path / "p.json", tmp_path / "p.csv"
    code, _, _ = _run(capsys, "maximize", "--r", "5", "--structure", "auto",
                      "--json", str(js), "--csv", str(csv))
    assert code == 0
    data = json.loads(js.read_text())
    assert data["structure"] == "two"
    lines = csv.read_text().splitlines()
    assert lines[0] == "t,y,z,q,theta" and len(lines) == data["grid_n"] + 2
    q = [float(l.split(",")[3]) for l in lines[1:]]
    assert max(q) <= 0 and max(abs(a - b) for a, b in zip(q, q[::-1])) < 1e-6
    code, out, _ = _run(capsys, "verify", "--profile", str(js))
    assert code == 0 and json.loads(out)["passed"] is True
    data["c_check"] += 1e-3
    js.write_text(json.dumps(data))
    code, out, _ = _run(capsys, "verify", "--profile", str(js))
    assert code == 4 and json.loads(out)["passed"] is False


def test_deterministic_output(capsys):
    outs = [_run(capsys, "--grid-n", "1024", "maximize", "--r", "20")[1] for _ in range(2)]
    assert outs[0] == outs[1] and json.loads(outs[0])["structure"] == "one"


def test_rstar(capsys):
    code, out, _ = _run(capsys, "rstar", "--rmin", "10", "--rmax", "20", "--tol", "1e-3")
    assert code == 0 and float(out) == pytest.approx(15.38984, abs=1e-3)


def test_exit_codes(capsys, tmp_path):
    assert _run(capsys, "eig", "--potential", "const:x")[0] == 2
    assert _run(capsys, "eig", "--potential", str(tmp_path / "missing.json"))[0] == 2
    assert _run(capsys, "frobnicate")[0] == 2
    assert _run(capsys, "--grid-n", "1000", "eig", "--potential", "zero")[0] == 2
    assert _run(capsys, "critical", "--p", "1.01", "--r", "1")[0] == 2
    g = tmp_path / "g.json"
    g.write_text(json.dumps({"a": 1e3, "b": 1e3, "xi": 1.0, "eta": 2.0}))
    code, _, err = _run(capsys, "critical", "--p", "2", "--r", "5", "--guess", str(g))
    assert code == 3 and err
    code, _, err = _run(capsys, "maximize", "--r", "5", "--structure", "one")
    assert code == 4 and "qcheck" in err
    assert _run(capsys, "rstar", "--rmin", "16", "--rmax", "20")[0] == 2


def test_env_grid(capsys, monkeypatch):
    monkeypatch.setenv("SLOPT_GRID_N", "512")
    code, out, _ = _run(capsys, "critical", "--p", "2", "--r", "1")
    assert code == 0 and json.loads(out)["grid_n"] == 512


def test_dumps_formats_17_digits():
    assert dumps({"x": 0.1, "y": [1, math.inf], "z": True}) == \
        '{"x": 0.10000000000000001, "y": [1, null], "z": true}'


def test_console_script():
    out = subprocess.run([sys.executable, "-m", "slopt.cli", "eig", "--potential", "zero",
                          "--count", "1"], capture_output=True, text=True, check=True)
    assert json.loads(out.stdout)[0]["m"] == 1
