import math

import numpy as np
import pytest

from nbein import compare, oracle_example1, oracle_example2, dressed_gauge, qgt, solve_at, two_state, nbein_tensor
from nbein.errors import DomainViolation
from nbein.geometry import berry_connection_fd, gamma_connection, r_curvature
from nbein.oracles import torsion_invariant_example1


def test_example1_values():
    o = oracle_example1(0, 1, (0.0, 1.0))
    np.testing.assert_allclose(o["g"], np.diag([0.5, 1 / 32]))
    assert o["scalar_curvature"] == -4
    assert math.isclose(abs(o["T"][0, 1]), 0.25 * math.sqrt(0.5))
    assert math.isclose(abs(o["G"][0, 1]), 0.125 * math.sqrt(0.5))
    assert math.isclose(o["invariants"]["N_T"], 8 / 3)


def test_example2_values():
    np.testing.assert_allclose(oracle_example2(0, None, (0.0, 0.0, 1.0))["g"], np.diag([0.5, 0.125, 0.03125]))
    w = math.sqrt(1 - 0.09)
    assert math.isclose(oracle_example2(2, 0, (1.0, 0.3, 1.0))["R"][1, 2], -2 / (4 * w**3))
    assert np.abs(oracle_example2(0, 3, (1.0, 0.3, 1.0))["T"]).max() == 0
    with pytest.raises(DomainViolation):
        oracle_example2(0, None, (0.0, 1.0, 1.0))


def test_torsion_invariant_formula():
    for n in range(6):
        assert math.isclose(torsion_invariant_example1(n), oracle_example1(n, n + 1)["invariants"]["N_T"], rel_tol=1e-12)


def test_compare_threshold():
    x = np.array([[1.0, 2.0], [3.0, 4.0]])
    r = compare(x, x)
    assert r.passed and r.error == 0
    assert not compare(x, x * (1 + 2e-6), tol=1e-6).passed


def test_example2_pipeline(ex2):
    lam = (1.0, 0.3, 1.0)
    b = solve_at(ex2, lam, levels=12)
    d = solve_at(ex2, lam, levels=12, gauge=dressed_gauge(ex2))
    for n in range(5):
        o = oracle_example2(n, None, lam)
        numeric = {"g": qgt(b, None, n).g, "F": qgt(b, None, n).F, "det_g": np.linalg.det(qgt(b, None, n).g)}
        assert compare(numeric, o, "invariant-only").passed
        assert compare(berry_connection_fd(ex2, lam, n, center=d), o["A"]).passed
        for m in range(max(0, n - 2), n + 3):
            if m == n:
                continue
            om = oracle_example2(n, m, lam)
            ts = two_state(b, None, n, m)
            assert compare(nbein_tensor(b)[n, m], om["e"], "modulus").passed
            assert compare(ts.G, om["G"], "modulus").passed
            assert compare(ts.T, om["T"], "modulus").passed
            assert compare(r_curvature(ex2, lam, n, m, center=b), om["R"]).passed
            assert compare(gamma_connection(ex2, lam, n, m, center=d).Gamma, om["Gamma"]).passed


@pytest.mark.parametrize("hbar", [0.5, 1.7])
def test_hbar_scaling(hbar):
    from nbein import builtin_family

    lam = (0.5, -0.4, 1.5)
    b = solve_at(builtin_family("example2", hbar), lam, levels=10)
    for n in range(3):
        assert compare(qgt(b, None, n).g, oracle_example2(n, None, lam, hbar)["g"], tol=1e-9).passed
        ts = two_state(b, None, n, n + 1)
        assert compare(ts.T, oracle_example2(n, n + 1, lam, hbar)["T"], "modulus", tol=1e-9).passed


def test_oracle_self_consistency():
    for n in range(5):
        o1 = oracle_example1(n, None, (0.4, 1.3), 1.4)
        assert math.isclose(o1["det_g"], np.linalg.det(o1["g"]), rel_tol=1e-12)
        o2 = oracle_example2(n, n + 1, (0.5, -0.4, 1.5), 0.8)
        assert math.isclose(o2["det_g"], np.linalg.det(o2["g"]), rel_tol=1e-12)
        np.testing.assert_allclose(o2["M"], o2["G"] + o2["T"] / 2j, atol=1e-14)
        np.testing.assert_allclose(o2["T"], -o2["T"].T, atol=1e-15)
