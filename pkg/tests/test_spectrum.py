import numpy as np
import pytest

from nbein import apply_gauge, converge_truncation, match_states, parse_family, qgt, solve_at
from nbein.errors import DegenerateSpectrum, DimensionTooSmall, NoConvergence
from nbein.spectrum import GaugePolicy


def test_example1_energies(ex1):
    b = solve_at(ex1, (1.0, 1.0), levels=8)
    np.testing.assert_allclose(b.energies[:6], np.arange(6) + 0.5 - 0.5, atol=1e-9)


def test_example1_states_real(b1):
    assert np.abs(b1.states.imag).max() <= 1e-10


def test_largest_entry_real_positive(b2):
    for k in range(b2.levels):
        v = b2.states[:, k]
        j = np.argmax(np.abs(v))
        assert v[j].imag == 0 and v[j].real > 0


def test_degenerate_family():
    spec = parse_family("Z*id", ["Z"])
    with pytest.raises(DegenerateSpectrum):
        solve_at(spec, (1.0,), levels=3)


def test_levels_bound(ex1):
    with pytest.raises(DimensionTooSmall):
        solve_at(ex1, (0.0, 1.0), trunc_dim=10, levels=8)


def test_match_identity_and_swap(b1):
    np.testing.assert_array_equal(match_states(b1.states, b1.states), np.arange(b1.levels))
    swapped = b1.states[:, [1, 0] + list(range(2, b1.levels))]
    perm = match_states(b1.states, swapped)
    assert list(perm[:2]) == [1, 0]


def test_match_near_avoided_crossing():
    sx = np.array([[0, 1], [1, 0]])
    sz = np.diag([1.0, -1.0])

    def states(t):
        return np.linalg.eigh(t * sz + 0.1 * sx)[1]

    for t in (-0.05, 0.0, 0.05):
        np.testing.assert_array_equal(match_states(states(t), states(t + 1e-4)), [0, 1])


def test_converge_truncation(ex1):
    d, delta = converge_truncation(ex1, (0.0, 1.0), 5, 1e-8, return_delta=True)
    assert delta <= 1e-8
    with pytest.raises(NoConvergence):
        converge_truncation(ex1, (0.0, 1.0), 5, 0.0)


def test_converge_exact_family():
    spec = parse_family("0.5*Z*q^2 + 0.5*Z*p^2", ["Z"])
    assert converge_truncation(spec, (1.3,), 4, 1e-12, d0=32) == 32


def test_apply_gauge_identity_and_sign(b2):
    z = apply_gauge(b2, ["0"] * b2.levels)
    np.testing.assert_array_equal(z.states, b2.states)
    neg = apply_gauge(b2, ["3.141592653589793"] * b2.levels)
    np.testing.assert_allclose(neg.states, -b2.states, atol=1e-15)
    np.testing.assert_allclose(np.abs(neg.states.conj().T @ b2.states), np.abs(b2.states.conj().T @ b2.states), atol=1e-14)


def test_apply_gauge_keeps_metric(b2, rng):
    c = rng.normal(size=b2.levels)
    p = apply_gauge(b2, [f"{x:.5f}*W" for x in c])
    for n in range(4):
        np.testing.assert_allclose(qgt(p, None, n).Q, qgt(b2, None, n).Q, atol=1e-8)


def test_apply_gauge_needs_every_level(b2):
    with pytest.raises(ValueError):
        apply_gauge(b2, ["W"])


def test_gauge_policy_validation():
    with pytest.raises(ValueError):
        GaugePolicy("nope")
    with pytest.raises(ValueError):
        GaugePolicy("reference-overlap")
