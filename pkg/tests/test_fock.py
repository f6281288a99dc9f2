import numpy as np
import pytest

from nbein.errors import DimensionTooSmall
from nbein.fock import Atom, Power, Product, Sym, build_monomial, ladder, quadratures
from nbein.hamdsl import assemble, builtin_family

Q, P = Atom("q"), Atom("p")


def test_ladder_entries():
    a, ad = ladder(3)
    expected = np.zeros((3, 3))
    expected[0, 1], expected[1, 2] = 1, np.sqrt(2)
    np.testing.assert_allclose(a.matrix, expected)
    np.testing.assert_array_equal(ad.matrix, a.matrix.conj().T)
    assert a.trunc_dim == a.matrix.shape[0] == 3
    np.testing.assert_array_equal(a.matrix @ np.eye(3)[:, 0], 0)


@pytest.mark.parametrize("hbar", [1.0, 0.3, 2.5])
def test_quadratures(hbar):
    d = 24
    q, p = quadratures(d, hbar)
    assert np.isclose((q.matrix @ q.matrix)[0, 0].real, hbar / 2)
    comm = q.matrix @ p.matrix - p.matrix @ q.matrix
    np.testing.assert_allclose(comm[: d - 2, : d - 2], 1j * hbar * np.eye(d - 2), atol=1e-13)
    for x in (q, p):
        assert np.abs(x.matrix - x.matrix.conj().T).max() <= 1e-14


def test_monomials():
    d = 16
    q = build_monomial(Q, d).matrix
    np.testing.assert_allclose(build_monomial(Power(Q, 2), d).matrix, q @ q)
    s = build_monomial(Sym((Q, P)), d).matrix
    assert np.abs(s - s.conj().T).max() <= 1e-12 * np.abs(s).max()
    qp = build_monomial(Product((Q, P)), d).matrix
    pq = build_monomial(Product((P, Q)), d).matrix
    np.testing.assert_allclose(s, (qp + pq) / 2)
    np.testing.assert_array_equal(build_monomial(Atom("id"), d).matrix, np.eye(d))


def test_degrees():
    assert Power(Q, 3).degree == 3
    assert Sym((Q, P)).degree == 2
    assert Atom("id").degree == 0


def test_example2_hamiltonian_hermitian():
    h, dh = assemble(builtin_family("example2"), (1.0, 0.3, 1.0), 64)
    assert np.abs(h - h.conj().T).max() <= 1e-12 * np.abs(h).max()
    assert len(dh) == 3


def test_too_small():
    with pytest.raises(DimensionTooSmall):
        ladder(1)
