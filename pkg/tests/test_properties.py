"""Gauge and conjugation laws on randomly drawn admissible points and phases."""

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from nbein import (
    apply_gauge,
    builtin_family,
    gamma_connection,
    invariant_report,
    nbein_tensor,
    qgt,
    solve_at,
    theta_eta_split,
    two_state,
)

EX2 = builtin_family("example2")
LEVELS = 8

points = st.tuples(st.floats(-1.5, 1.5), st.floats(-0.6, 0.6), st.floats(0.6, 2.0)).filter(lambda p: p[2] - p[1] ** 2 > 0.3)
coefficients = st.lists(st.floats(-2, 2), min_size=3 * LEVELS, max_size=3 * LEVELS)
pairs = st.tuples(st.integers(0, 3), st.integers(0, 3)).filter(lambda p: p[0] != p[1])


def phase_texts(c):
    return [f"({c[3 * k]})*W + ({c[3 * k + 1]})*Z^2 + ({c[3 * k + 2]})*W*Y" for k in range(LEVELS)]


def phase_values(c, lam):
    w, y, z = lam
    a = np.array(c).reshape(LEVELS, 3)
    alpha = a[:, 0] * w + a[:, 1] * z * z + a[:, 2] * w * y
    grad = np.stack([a[:, 0] + a[:, 2] * y, a[:, 2] * w, 2 * a[:, 1] * z], axis=1)
    return alpha, grad


@settings(max_examples=15, deadline=None)
@given(points, coefficients, pairs)
def test_gauge_laws(lam, c, pair):
    n, m = pair
    b = solve_at(EX2, lam, levels=LEVELS)
    p = apply_gauge(b, phase_texts(c))
    alpha, grad = phase_values(c, b.lam)
    u = np.exp(1j * (alpha[n] - alpha[m]))

    np.testing.assert_allclose(qgt(p, None, n).Q, qgt(b, None, n).Q, atol=1e-8)
    np.testing.assert_allclose(nbein_tensor(p)[n, m], u * nbein_tensor(b)[n, m], atol=1e-10)
    t0, t1 = two_state(b, None, n, m), two_state(p, None, n, m)
    for x0, x1 in [(t0.M, t1.M), (t0.G, t1.G), (t0.T, t1.T)]:
        np.testing.assert_allclose(x1, u * x0, atol=1e-10)
    r0, r1 = invariant_report(b, n, m), invariant_report(p, n, m)
    for key in r0.tensors:
        np.testing.assert_allclose(r1.tensors[key].values, r0.tensors[key].values, atol=1e-8)
    g0 = gamma_connection(EX2, lam, n, m, center=b)
    g1 = gamma_connection(EX2, lam, n, m, center=p)
    np.testing.assert_allclose(g1.Gamma, g0.Gamma - (grad[n] - grad[m]), atol=1e-6)
    np.testing.assert_allclose(g1.R, g0.R, atol=1e-6)


@settings(max_examples=20, deadline=None)
@given(points, pairs)
def test_conjugation(lam, pair):
    n, m = pair
    b = solve_at(EX2, lam, levels=LEVELS)
    e = nbein_tensor(b)
    np.testing.assert_allclose(e[n, m].conj(), e[m, n], atol=1e-10)
    a, r = theta_eta_split(e[n, m]), theta_eta_split(e[m, n])
    np.testing.assert_allclose(a.theta, r.theta, atol=1e-10)
    np.testing.assert_allclose(a.eta, -r.eta, atol=1e-10)
    x, y = two_state(b, None, n, m), two_state(b, None, m, n)
    np.testing.assert_allclose(x.T.conj(), y.T, atol=1e-10)
    np.testing.assert_allclose(x.M.conj(), y.M.T, atol=1e-10)
    np.testing.assert_allclose(x.G.conj(), y.G, atol=1e-10)
    np.testing.assert_allclose(x.M, x.G + x.T / 2j, atol=1e-12)
    assert invariant_report(b, n, m).symmetry_residual < 1e-9


@settings(max_examples=15, deadline=None)
@given(points, st.integers(0, 3))
def test_qgt_routes(lam, n):
    b = solve_at(EX2, lam, levels=12)
    ref = qgt(b, None, n).Q
    for method in ("projector", "zanardi"):
        np.testing.assert_allclose(qgt(b, None, n, method).Q, ref, atol=1e-9)
    q = qgt(b, None, n)
    np.testing.assert_allclose(q.g, q.g.T, atol=1e-14)
    assert np.linalg.eigvalsh(q.g).min() > -1e-12
