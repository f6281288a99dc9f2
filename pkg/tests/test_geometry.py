import math

import numpy as np
import pytest

from nbein import (
    apply_gauge,
    berry_connection_fd,
    berry_curvature_fd,
    bianchi_residuals,
    first_order_overlap_check,
    gamma_connection,
    nbein_fd,
    nbein_spectral,
    nbein_tensor,
    oracle_example2,
    dressed_gauge,
    qgt,
    r_curvature,
    solve_at,
    theta_eta_split,
    torsion,
    two_state,
)

from .conftest import EX2_POINT


def test_example1_nbeins(b1):
    e10 = nbein_spectral(b1, None, 1, 0).components
    assert math.isclose(abs(e10[0]), math.sqrt(0.5), rel_tol=1e-10)
    assert abs(e10[1]) < 1e-12
    e02 = nbein_spectral(b1, None, 0, 2).components
    assert abs(e02[0]) < 1e-12
    assert math.isclose(abs(e02[1]), math.sqrt(2) / 8, rel_tol=1e-10)
    assert np.abs(nbein_spectral(b1, None, 0, 3).components).max() < 1e-12


def test_nbein_fd_second_order(ex2, b2):
    exact = nbein_tensor(b2)[0, 1]
    errs = [np.abs(nbein_fd(ex2, EX2_POINT, 0, 1, h, center=b2).components - exact).max() for h in (4e-3, 2e-3)]
    assert 3.5 < errs[0] / errs[1] < 4.5


def test_nbein_fd_translation_invariant(ex1):
    a = nbein_fd(ex1, (0.0, 1.0), 0, 1).components
    b = nbein_fd(ex1, (1.7, 1.0), 0, 1).components
    np.testing.assert_allclose(np.abs(a), np.abs(b), atol=1e-9)


def test_nbein_fd_example2_moduli(ex2, b2):
    for n in range(4):
        for m in (n - 1, n + 1):
            if m < 0:
                continue
            e = nbein_fd(ex2, EX2_POINT, n, m, center=b2).components
            np.testing.assert_allclose(np.abs(e), np.abs(oracle_example2(n, m, EX2_POINT)["e"]), atol=1e-6)


def test_berry_connection(ex1, ex2):
    assert np.abs(berry_connection_fd(ex1, (0.5, 1.0), 2)).max() < 1e-9
    # default gauge: zero at the symmetric point
    assert np.abs(berry_connection_fd(ex2, (0.0, 0.0, 1.0), 1)).max() < 1e-9
    # coordinate-wavefunction gauge reproduces the closed form
    d = solve_at(ex2, (0.0, 0.0, 1.0), levels=8, gauge=dressed_gauge(ex2))
    np.testing.assert_allclose(berry_connection_fd(ex2, None, 1, center=d), oracle_example2(1, None, (0.0, 0.0, 1.0))["A"], atol=1e-6)


def test_berry_connection_shift(ex2, b2):
    p = apply_gauge(b2, [f"{k}*W*Z + {0.3 * k}*Y^2" for k in range(b2.levels)])
    a0 = berry_connection_fd(ex2, EX2_POINT, 2, center=b2)
    a1 = berry_connection_fd(ex2, EX2_POINT, 2, center=p)
    w, y, z = EX2_POINT
    grad = np.array([2 * z, 0.6 * 2 * y, 2 * w])
    np.testing.assert_allclose(a1, a0 - grad, atol=1e-6)


def test_qgt_values(b1, ex2):
    q = qgt(b1, None, 0)
    np.testing.assert_allclose(q.g, np.diag([0.5, 1 / 32]), atol=1e-12)
    np.testing.assert_allclose(q.F, 0, atol=1e-12)
    b = solve_at(ex2, (0.0, 0.0, 1.0), levels=8)
    q = qgt(b, None, 0)
    np.testing.assert_allclose(q.g, np.diag([0.5, 0.125, 0.03125]), atol=1e-12)
    assert math.isclose(q.F[1, 2], -0.125, rel_tol=1e-10)


@pytest.mark.parametrize("method", ["projector", "zanardi"])
def test_qgt_methods(b2, method):
    for n in range(4):
        np.testing.assert_allclose(qgt(b2, None, n, method).Q, qgt(b2, None, n).Q, atol=1e-9)


def test_two_state_example1(b1):
    ts = two_state(b1, None, 0, 1)
    assert math.isclose(abs(ts.T[0, 1]), 0.25 * math.sqrt(0.5), rel_tol=1e-10)
    assert math.isclose(abs(ts.G[0, 1]), 0.125 * math.sqrt(0.5), rel_tol=1e-10)
    assert np.abs(two_state(b1, None, 0, 3).T).max() < 1e-12
    assert np.abs(two_state(b1, None, 0, 5).M).max() < 1e-12
    ts = two_state(b1, None, 1, 0)
    assert math.isclose(abs(ts.T[0, 1]), 0.25 * math.sqrt(0.5), rel_tol=1e-10)


def test_pair_rejected(b1):
    with pytest.raises(ValueError):
        two_state(b1, None, 2, 2)
    with pytest.raises(ValueError):
        gamma_connection(None, None, 1, 1, center=b1)


def test_gamma_and_r(ex1, ex2):
    w, y, z = EX2_POINT
    omega = math.sqrt(z - y * y)
    d = solve_at(ex2, EX2_POINT, levels=8, gauge=dressed_gauge(ex2))
    for n, m in [(0, 1), (2, 0), (1, 3)]:
        gam = gamma_connection(ex2, EX2_POINT, n, m, center=d).Gamma
        np.testing.assert_allclose(gam, (n - m) / (2 * z * omega) * np.array([0, z, -y]), atol=1e-6)
        r = r_curvature(ex2, EX2_POINT, n, m, center=d)
        assert math.isclose(r[1, 2], -(n - m) / (4 * omega**3), rel_tol=1e-6)
        np.testing.assert_array_equal(r, -r_curvature(ex2, EX2_POINT, m, n, center=d))
    c = gamma_connection(ex1, (0.3, 1.4), 0, 2)
    assert np.abs(c.Gamma).max() < 1e-9 and np.abs(c.R).max() < 1e-9


def test_plaquette_matches_spectral(ex2, b2):
    for n in range(3):
        np.testing.assert_allclose(berry_curvature_fd(ex2, EX2_POINT, n, center=b2), qgt(b2, None, n).F, atol=1e-7)


def test_torsion_routes(ex2, b2):
    ref = torsion(ex2, EX2_POINT, 0, 1, "nbein-sum", center=b2)
    for route in ("covariant-fd", "hamiltonian"):
        np.testing.assert_allclose(torsion(ex2, EX2_POINT, 0, 1, route, center=b2), ref, atol=1e-6)
    assert np.abs(torsion(ex2, EX2_POINT, 1, 3, "hamiltonian", center=b2)).max() < 1e-10


def test_torsion_example1_reversed(ex1):
    for hbar in (1.0, 2.0):
        from nbein import builtin_family

        t = torsion(builtin_family("example1", hbar), (0.0, 1.0), 1, 0)
        assert math.isclose(abs(t[0, 1]), 0.25 * math.sqrt(1 / (2 * hbar)), rel_tol=1e-9)


def test_theta_eta(b1, b2):
    e1 = nbein_tensor(b1)
    assert np.abs(theta_eta_split(e1[0, 1]).theta).max() < 1e-12
    e = e1[2, 3]
    te = theta_eta_split(e)
    np.testing.assert_array_equal(te.theta + 1j * te.eta, e)
    te2 = theta_eta_split(nbein_tensor(b2)[0, 1])
    assert np.abs(te2.theta).max() > 1e-3 and np.abs(te2.eta).max() > 1e-3


def test_overlap_check(ex1, ex2, b2):
    exact, _, _ = first_order_overlap_check(ex2, EX2_POINT, (0.0, 0.0, 0.0), 0, 1, center=b2)
    assert abs(exact) < 1e-14
    d = np.array([0.3, -0.5, 0.4]) * 1e-3
    r1 = first_order_overlap_check(ex2, EX2_POINT, d, 0, 1, center=b2)[2]
    r2 = first_order_overlap_check(ex2, EX2_POINT, d / 2, 0, 1, center=b2)[2]
    assert 3.5 < r1 / r2 < 4.5
    for delta in (1e-3, 5e-4):
        exact, predicted, _ = first_order_overlap_check(ex1, (0.0, 1.0), (0.0, delta), 1, 2)
        assert predicted == 0
        assert abs(exact) <= 10 * delta**2


def test_bianchi(ex1, ex2):
    assert bianchi_residuals(ex1, (0.0, 1.0), 0, 1) == (0.0, 0.0)
    d_r, d_t = bianchi_residuals(ex2, EX2_POINT, 0, 1)
    assert d_r <= 1e-6 and d_t <= 1e-4
