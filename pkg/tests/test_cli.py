import csv
import io
import json

import numpy as np
import pytest

from nbein.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_eval_metric(capsys):
    code, out, _ = run(capsys, "eval", "--lambda", "W=0,Z=1", "--n", "0")
    assert code == 0
    d = json.loads(out)
    np.testing.assert_allclose(d["g"], [[0.5, 0], [0, 0.03125]], atol=1e-12)
    assert {"energies", "nbein", "A", "Q", "g", "F", "det_g"} <= set(d)
    assert len(d["Q"][0][0]) == 2  # complex as [re, im]


def test_eval_pair_keys(capsys):
    code, out, _ = run(capsys, "eval", "--family", "example2", "--lambda", "W=1,Y=0.3,Z=1", "--n", "1", "--m", "+1")
    assert code == 0
    d = json.loads(out, parse_constant=lambda c: pytest.fail(c))
    assert {"M", "G", "T", "Gamma", "R", "invariants"} <= set(d)
    assert {"N_M", "N_G", "N_T", "A_M", "A_G", "A_T", "scalars"} <= set(d["invariants"])
    assert d["m"] == 2


def test_eval_is_deterministic(capsys, tmp_path):
    outs = []
    for k in range(2):
        path = tmp_path / f"o{k}.json"
        assert main(["eval", "--lambda", "W=0.3,Z=1.2", "--n", "1", "--m", "2", "--out", str(path)]) == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


@pytest.mark.parametrize(
    "argv",
    [
        ["eval", "--lambda", "W=0,Z=1", "--n", "1", "--m", "1"],
        ["eval", "--lambda", "W=0"],
        ["eval", "--lambda", "W=0,Z=1", "--gauge", "sideways"],
        ["eval", "--family", "q**", "--params", "W", "--lambda", "W=0"],
        ["eval", "--family", "W*q", "--lambda", "W=0"],
        ["sweep", "--lambda", "W=0,Z=1"],
        ["verify", "--suite", "nope"],
    ],
)
def test_config_errors(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert err


def test_unknown_config_key(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"family": "example1", "colour": "blue"}))
    code, _, err = run(capsys, "eval", "--config", str(cfg), "--lambda", "W=0,Z=1")
    assert code == 2 and "colour" in err


def test_config_file_and_override(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"family": "example1", "hbar": 2.0, "levels": 8}))
    _, out, _ = run(capsys, "eval", "--config", str(cfg), "--lambda", "W=0,Z=1")
    assert json.loads(out)["hbar"] == 2.0
    _, out, _ = run(capsys, "eval", "--config", str(cfg), "--hbar", "1", "--lambda", "W=0,Z=1")
    d = json.loads(out)
    assert d["hbar"] == 1.0 and d["levels"] == 8


def test_non_strict_config(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text('{"hbar": NaN}')
    assert run(capsys, "eval", "--config", str(cfg), "--lambda", "W=0,Z=1")[0] == 2


def test_domain_error(capsys):
    code, _, err = run(capsys, "eval", "--lambda", "W=0,Z=-1")
    assert code == 3 and "DomainViolation" in err


def test_sweep_levels(capsys):
    code, out, _ = run(capsys, "sweep", "--lambda", "W=0,Z=1", "--axis", "n=0:8", "--m", "+1")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    nt = [float(r["N_T"]) for r in rows]
    assert len(rows) == 9
    assert all(a > b for a, b in zip(nt, nt[1:]))


def test_sweep_grid(capsys):
    code, out, _ = run(capsys, "sweep", "--axis", "W=0:1:3", "--axis", "Z=0.5:2:3", "--m", "+2", "--jobs", "2")
    assert code == 0
    lines = out.splitlines()
    assert len(lines) == 10
    assert lines[0] == "W,Z,n,m,det_g,N_M,N_G,N_T"
    rows = list(csv.DictReader(io.StringIO(out)))
    for col in ("N_M", "N_G", "N_T"):
        v = [float(r[col]) for r in rows]
        assert max(v) - min(v) < 1e-8
    serial = run(capsys, "sweep", "--axis", "W=0:1:3", "--axis", "Z=0.5:2:3", "--m", "+2")[1]
    assert serial == out


def test_riemann(capsys):
    for n, expected in [(0, -4.0), (2, -4 / 7)]:
        code, out, _ = run(capsys, "riemann", "--lambda", "W=0,Z=1", "--n", str(n), "--format", "json")
        assert code == 0
        assert abs(json.loads(out)["scalar_curvature"] - expected) < 1e-3
    code, out, _ = run(capsys, "riemann", "--lambda", "W=0,Z=1")
    assert code == 0 and out.startswith("R = ")
    assert run(capsys, "riemann", "--lambda", "W=0,Z=0")[0] == 3


def test_verify(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "example1")
    assert code == 0 and "FAIL" not in out
    code, out, _ = run(capsys, "verify", "--suite", "example1", "--hbar", "1.2")
    assert code == 1 and "FAIL" in out


def test_verify_properties_ignore_hbar(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "properties", "--hbar", "1.2")
    assert code == 0
    assert "gauge transformation laws" in out and "conjugation" in out
