import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nbein.errors import NotHermitian, ShapeMismatch
from nbein.linalg import (
    add,
    adjoint,
    as_matrix,
    check_hermitian,
    commutator,
    hermitian_eigendecompose,
    hermiticity_residual,
    product,
    scale,
)

from .conftest import random_hermitian


@pytest.mark.parametrize("backend", ["lapack", "native"])
def test_pauli_x(backend):
    es = hermitian_eigendecompose(np.array([[0, 1], [1, 0]]), backend=backend)
    np.testing.assert_allclose(es.eigenvalues, [-1, 1], atol=1e-14)


@pytest.mark.parametrize("backend", ["lapack", "native"])
def test_identity(backend):
    es = hermitian_eigendecompose(np.eye(4), backend=backend)
    np.testing.assert_allclose(es.eigenvalues, np.ones(4))
    v = es.eigenvectors
    assert np.abs(v.conj().T @ v - np.eye(4)).max() < 1e-12


@pytest.mark.parametrize("backend", ["lapack", "native"])
def test_random_reconstruction(backend, rng):
    h = random_hermitian(rng, 32)
    es = hermitian_eigendecompose(h, backend=backend)
    e, v = es.eigenvalues, es.eigenvectors
    assert np.all(np.diff(e) >= 0)
    assert np.abs(v.conj().T @ v - np.eye(32)).max() <= 1e-10
    assert np.linalg.norm(h @ v - v * e) <= 1e-10 * np.linalg.norm(h)


def test_backends_agree(rng):
    h = random_hermitian(rng, 20)
    a = hermitian_eigendecompose(h, backend="lapack").eigenvalues
    b = hermitian_eigendecompose(h, backend="native").eigenvalues
    np.testing.assert_allclose(a, b, atol=1e-11)


def test_rejects_non_hermitian():
    with pytest.raises(NotHermitian):
        hermitian_eigendecompose(np.array([[0, 1], [0, 0]]))


def test_rejects_bad_shapes():
    with pytest.raises(ShapeMismatch):
        as_matrix(np.zeros(3))
    with pytest.raises(ShapeMismatch):
        product(np.zeros((2, 3)), np.zeros((2, 3)))
    with pytest.raises(ShapeMismatch):
        add(np.zeros((2, 2)), np.zeros((3, 3)))


def test_dense_ops(rng):
    a = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    b = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    np.testing.assert_array_equal(product(a, np.eye(3)), a)
    assert np.abs(adjoint(product(a, b)) - product(adjoint(b), adjoint(a))).max() < 1e-14
    assert np.abs(commutator(a, a)).max() == 0
    np.testing.assert_allclose(add(a, scale(-1, a)), 0)


def test_hermiticity_residual(rng):
    h = random_hermitian(rng, 5)
    assert hermiticity_residual(h) == 0
    check_hermitian(h)
    h[0, 1] += 1e-3
    assert hermiticity_residual(h) > 0
    with pytest.raises(NotHermitian):
        check_hermitian(h)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 12), st.integers(0, 2**31 - 1))
def test_native_eigensolver_properties(d, seed):
    h = random_hermitian(np.random.default_rng(seed), d)
    es = hermitian_eigendecompose(h, backend="native")
    v, e = es.eigenvectors, es.eigenvalues
    assert np.all(np.diff(e) >= -1e-12)
    assert np.abs(v.conj().T @ v - np.eye(d)).max() <= 1e-10
    assert np.linalg.norm(h @ v - v * e) <= 1e-10 * max(np.linalg.norm(h), 1.0)
