"""Dense complex matrix helpers and a Hermitian eigensolver.

Matrices are plain ``numpy`` complex arrays. The eigensolver has two
backends: ``"lapack"`` (``numpy.linalg.eigh``) and ``"native"``, a
Householder tridiagonalisation followed by implicit-shift QL written here.
Both return eigenvalues sorted ascending with ties kept in input order, and
both are checked against the same post-conditions.
"""

from dataclasses import dataclass

import numpy as np

from .errors import NoConvergence, NotHermitian, ShapeMismatch

HERMITIAN_RTOL = 1e-12


@dataclass(frozen=True)
class HermitianEigenSystem:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # columns


def as_matrix(a):
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2:
        raise ShapeMismatch(f"expected a 2-d matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def _conformable(a, b, op):
    if a.shape != b.shape if op == "add" else a.shape[1] != b.shape[0]:
        raise ShapeMismatch(f"cannot {op} shapes {a.shape} and {b.shape}")


def product(a, b):
    a, b = as_matrix(a), as_matrix(b)
    _conformable(a, b, "multiply")
    return a @ b


def adjoint(a):
    return as_matrix(a).conj().T


def scale(c, a):
    return complex(c) * as_matrix(a)


def add(a, b):
    a, b = as_matrix(a), as_matrix(b)
    _conformable(a, b, "add")
    return a + b


def commutator(a, b):
    a, b = as_matrix(a), as_matrix(b)
    if a.shape[0] != a.shape[1] or a.shape != b.shape:
        raise ShapeMismatch(f"commutator needs equal square shapes, got {a.shape}, {b.shape}")
    return a @ b - b @ a


def hermiticity_residual(h):
    """``max|H - H^dagger|`` relative to ``max|H|`` (0 for the zero matrix)."""
    h = np.asarray(h)
    scale_ = np.abs(h).max() if h.size else 0.0
    if scale_ == 0.0:
        return 0.0
    return float(np.abs(h - h.conj().T).max() / scale_)


def check_hermitian(h, rtol=HERMITIAN_RTOL):
    h = as_matrix(h)
    if h.shape[0] != h.shape[1]:
        raise ShapeMismatch(f"matrix must be square, got {h.shape}")
    res = hermiticity_residual(h)
    if res > rtol:
        raise NotHermitian(f"Hermiticity residual {res:.3e} exceeds {rtol:.1e}")
    return h


def householder_tridiagonal(h):
    """Reduce Hermitian ``h`` to real symmetric tridiagonal form.

    Returns ``(d, e, q)`` with ``q^dagger h q = tridiag(e, d, e)``, ``d`` the
    real diagonal and ``e`` the real non-negative sub-diagonal.
    """
    a = np.array(h, dtype=complex)
    n = a.shape[0]
    q = np.eye(n, dtype=complex)
    for k in range(n - 2):
        x = a[k + 1:, k]
        norm = np.linalg.norm(x)
        if norm == 0.0:
            continue
        phase = x[0] / abs(x[0]) if x[0] != 0 else 1.0
        alpha = -phase * norm
        v = x.copy()
        v[0] -= alpha
        vnorm = np.linalg.norm(v)
        if vnorm == 0.0:
            continue
        v /= vnorm
        block = a[k + 1:, k + 1:]
        p = block @ v
        kk = np.vdot(v, p).real
        w = p - kk * v
        block -= 2.0 * (np.outer(v, w.conj()) + np.outer(w, v.conj()))
        a[k + 1:, k] = 0.0
        a[k, k + 1:] = 0.0
        a[k + 1, k] = alpha
        a[k, k + 1] = np.conj(alpha)
        q[:, k + 1:] -= 2.0 * np.outer(q[:, k + 1:] @ v, v.conj())
    d = a.diagonal().real.copy()
    off = a.diagonal(-1).copy()
    # unitary diagonal phases make the sub-diagonal real and non-negative
    phases = np.ones(n, dtype=complex)
    for k in range(n - 1):
        mag = abs(off[k])
        phases[k + 1] = phases[k] * (off[k] / mag if mag > 0 else 1.0)
    q = q * phases[np.newaxis, :]
    return d, np.abs(off), q


def tridiagonal_ql(d, e, z, max_iter=60):
    """Implicit-shift QL on a real symmetric tridiagonal matrix, in place.

    ``d`` (length n) is the diagonal, ``e`` (length n-1) the sub-diagonal;
    rotations are accumulated into the columns of ``z``.
    """
    n = len(d)
    d = np.array(d, dtype=float)
    ee = np.zeros(n)
    ee[: n - 1] = e
    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(ee[m]) + dd == dd:
                    break
                m += 1
            if m == l:
                break
            it += 1
            if it > max_iter:
                raise NoConvergence(f"QL iteration did not converge for eigenvalue {l}")
            g = (d[l + 1] - d[l]) / (2.0 * ee[l])
            r = np.hypot(g, 1.0)
            g = d[m] - d[l] + ee[l] / (g + np.copysign(r, g))
            s = c = 1.0
            p = 0.0
            i = m - 1
            underflow = False
            while i >= l:
                f = s * ee[i]
                b = c * ee[i]
                r = np.hypot(f, g)
                ee[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    ee[m] = 0.0
                    underflow = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                zi1 = z[:, i + 1].copy()
                z[:, i + 1] = s * z[:, i] + c * zi1
                z[:, i] = c * z[:, i] - s * zi1
                i -= 1
            if underflow:
                continue
            d[l] -= p
            ee[l] = g
            ee[m] = 0.0
    return d, z


def _native_eigh(h):
    d, e, q = householder_tridiagonal(h)
    w, z = tridiagonal_ql(d, e, np.eye(len(d)))
    return w, q @ z


def hermitian_eigendecompose(h, tol=1e-10, backend="lapack"):
    """Eigen-decompose a Hermitian matrix.

    Args:
        h: square complex matrix with relative Hermiticity residual <= 1e-12.
        tol: post-condition tolerance on orthonormality and reconstruction.
        backend: ``"lapack"`` or ``"native"``.

    Returns:
        HermitianEigenSystem with ascending eigenvalues and unit eigenvector
        columns.
    """
    h = check_hermitian(h)
    h = 0.5 * (h + h.conj().T)
    n = h.shape[0]
    if backend == "lapack":
        w, v = np.linalg.eigh(h)
    elif backend == "native":
        w, v = _native_eigh(h)
    else:
        raise ValueError(f"unknown eigensolver backend {backend!r}")
    order = np.argsort(w, kind="stable")
    w = np.asarray(w[order], dtype=float)
    v = np.ascontiguousarray(v[:, order], dtype=complex)

    ortho = np.abs(v.conj().T @ v - np.eye(n)).max() if n else 0.0
    hnorm = np.linalg.norm(h)
    recon = np.linalg.norm(h @ v - v * w[np.newaxis, :])
    if ortho > tol or recon > tol * hnorm:
        raise NoConvergence(
            f"eigensolver post-conditions failed: orthogonality {ortho:.2e}, reconstruction {recon:.2e}"
        )
    return HermitianEigenSystem(w, v)
