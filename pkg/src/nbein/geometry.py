"""N-beins and everything built from them.

Index conventions: ``e[n, m, i] = i <m|d_i n>`` for retained levels ``n, m``
and parameter ``i``. Spectral routes use the Hamiltonian-derivative form
``i <m|d_i H|n> / (E_n - E_m)``; finite-difference routes differentiate
states on a stencil aligned to the centre bundle (see ``spectrum.Stencil``).

Sign conventions: ``Q = g - iF/2`` so ``g = Re Q`` and ``F = -2 Im Q``;
``F_ij = d_i A_j - d_j A_i``; ``M = G + T/(2i)`` with ``T = i(M - M^T)``.
"""

import weakref
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import DegeneratePair
from .spectrum import Stencil, default_steps, solve_at


@dataclass(frozen=True)
class NBein:
    level_n: int
    level_m: int
    components: np.ndarray  # complex, one entry per parameter


@dataclass(frozen=True)
class ThetaEta:
    theta: np.ndarray
    eta: np.ndarray


@dataclass(frozen=True)
class QgtResult:
    Q: np.ndarray
    g: np.ndarray
    F: np.ndarray


@dataclass(frozen=True)
class TwoStateResult:
    M: np.ndarray
    G: np.ndarray
    T: np.ndarray


@dataclass(frozen=True)
class ConnectionPair:
    A_n: np.ndarray
    A_m: np.ndarray
    Gamma: np.ndarray
    R: np.ndarray


# ---------------------------------------------------------------------------
# spectral routes


def _projected(bundle, dH):
    if dH is None:
        return bundle.projected
    v = bundle.states
    return np.array([v.conj().T @ np.asarray(d) @ v for d in dH])


def _inverse_gaps(bundle):
    e = bundle.energies
    de = e[:, None] - e[None, :]
    floor = bundle.gap_tol * bundle.spectral_range
    off = ~np.eye(len(e), dtype=bool)
    if np.any(np.abs(de[off]) <= floor):
        n, m = np.argwhere(off & (np.abs(de) <= floor))[0]
        raise DegeneratePair(f"levels {n} and {m} are degenerate (|dE| = {abs(de[n, m]):.3e})")
    with np.errstate(divide="ignore"):
        inv = np.where(off, 1.0 / np.where(off, de, 1.0), 0.0)
    return inv  # inv[n, m] = 1/(E_n - E_m), zero on the diagonal


def nbein_tensor(bundle, dH=None):
    """All retained N-beins at once: ``e[n, m, i]``, zero for ``n == m``."""
    x = _projected(bundle, dH)  # x[i, m, n] = <m|d_i H|n>
    inv = _inverse_gaps(bundle)
    return 1j * np.transpose(x, (2, 1, 0)) * inv[:, :, None]


def _check_levels(bundle, *levels):
    for k in levels:
        if not 0 <= k < bundle.levels:
            raise ValueError(f"level {k} not among the {bundle.levels} retained levels")


def _check_pair(bundle, n, m):
    _check_levels(bundle, n, m)
    if n == m:
        raise ValueError("the pair quantities need two different levels (n != m)")


def nbein_spectral(bundle, dH, n, m):
    """``e^(n)_{i m} = i <m|d_i H|n> / (E_n - E_m)``."""
    _check_pair(bundle, n, m)
    return NBein(n, m, nbein_tensor(bundle, dH)[n, m].copy())


def _qgt_parts(q):
    q = 0.5 * (q + q.conj().T)
    return QgtResult(q, q.real.copy(), -2.0 * q.imag)


def qgt(bundle, dH=None, n=0, method="nbein-sum"):
    """Quantum geometric tensor of level ``n`` by one of three routes.

    ``nbein-sum`` and ``zanardi`` sum over the retained levels; ``projector``
    solves for the orthogonal part of ``|d_i n>`` on the full truncated space.
    """
    _check_levels(bundle, n)
    if method == "nbein-sum":
        e = nbein_tensor(bundle, dH)[n]  # (m, i)
        q = e.conj().T @ e
    elif method == "zanardi":
        x = _projected(bundle, dH)
        inv = _inverse_gaps(bundle)[n]
        q = np.einsum("im,jm,m->ij", x[:, n, :], x[:, :, n], inv**2)
    elif method == "projector":
        q = _projector_qgt(bundle, dH, n)
    else:
        raise ValueError(f"unknown QGT method {method!r}")
    return _qgt_parts(q)


def _projector_qgt(bundle, dH, n):
    h = bundle.hamiltonian
    derivs = bundle.derivatives if dH is None else dH
    psi = bundle.states[:, n]
    proj = np.outer(psi, psi.conj())
    a = bundle.energies[n] * np.eye(h.shape[0]) - h + proj
    rhs = np.array([d @ psi for d in derivs]).T
    rhs -= np.outer(psi, psi.conj() @ rhs)
    u = np.linalg.solve(a, rhs)
    return u.conj().T @ u


def two_state(bundle, dH, n, m):
    """``M_ij = sum_{l != n,m} e^(m)*_{i l} e^(n)_{j l}`` with its two parts."""
    _check_pair(bundle, n, m)
    e = nbein_tensor(bundle, dH)
    keep = np.ones(bundle.levels, dtype=bool)
    keep[[n, m]] = False
    mm = e[m, keep].conj().T @ e[n, keep]
    return TwoStateResult(mm, 0.5 * (mm + mm.T), 1j * (mm - mm.T))


def _torsion_hamiltonian(bundle, n, m):
    x = bundle.projected
    inv = _inverse_gaps(bundle)
    keep = np.ones(bundle.levels, dtype=bool)
    keep[[n, m]] = False
    w = (inv[m] * inv[n])[keep]  # 1/((E_m - E_l)(E_n - E_l))
    a = np.einsum("il,jl,l->ij", x[:, m, keep], x[:, keep, n], w)
    return 1j * (a - a.T)


def theta_eta_split(e):
    c = e.components if isinstance(e, NBein) else np.asarray(e)
    return ThetaEta(c.real.copy(), c.imag.copy())


# ---------------------------------------------------------------------------
# finite-difference routes

_STENCILS = weakref.WeakKeyDictionary()


def stencil_for(center):
    st = _STENCILS.get(center)
    if st is None:
        st = _STENCILS[center] = Stencil(center)
    return st


def _center(spec, lam, center, solve_kw):
    if center is not None:
        return center
    return solve_at(spec, lam, **solve_kw)


def _steps(center, h, rel=1e-5):
    if h is None:
        return default_steps(center.lam, rel)
    h = np.broadcast_to(np.asarray(h, dtype=float), (len(center.lam),)).copy()
    if np.any(h <= 0):
        raise ValueError("finite-difference steps must be positive")
    return h


def _unit(k, i):
    u = np.zeros(k)
    u[i] = 1.0
    return u


def _state_derivative(center, n, h):
    """Central difference ``d_i |n>`` in the aligned stencil gauge, shape (D, N)."""
    st = stencil_for(center)
    k = len(center.lam)
    cols = []
    for i in range(k):
        plus = st.shifted(h[i] * _unit(k, i)).states[:, n]
        minus = st.shifted(-h[i] * _unit(k, i)).states[:, n]
        cols.append((plus - minus) / (2.0 * h[i]))
    return np.array(cols).T


def nbein_fd(spec, lam, n, m, h=None, *, center=None, **solve_kw):
    """``e^(n)_{i m} = i <m|d_i n>`` from differentiated stencil states."""
    c = _center(spec, lam, center, solve_kw)
    _check_pair(c, n, m)
    d = _state_derivative(c, n, _steps(c, h))
    return NBein(n, m, 1j * (c.states[:, m].conj() @ d))


def berry_connection_fd(spec, lam, n, h=None, *, center=None, **solve_kw):
    """``A^(n)_i = i <n|d_i n>`` in the stencil gauge (reported with ``center.gauge``)."""
    c = _center(spec, lam, center, solve_kw)
    _check_levels(c, n)
    d = _state_derivative(c, n, _steps(c, h))
    return (1j * (c.states[:, n].conj() @ d)).real


def _plaquette(st, n, i, j, hi, hj):
    k = len(st.center.lam)
    ei, ej = _unit(k, i), _unit(k, j)
    corners = [(-hi, -hj), (hi, -hj), (hi, hj), (-hi, hj)]
    s = [st.shifted(a * ei + b * ej).raw_states[:, n] for a, b in corners]
    loop = np.vdot(s[0], s[1]) * np.vdot(s[1], s[2]) * np.vdot(s[2], s[3]) * np.vdot(s[3], s[0])
    return -np.angle(loop) / (4.0 * hi * hj)


def berry_curvature_fd(spec, lam, n, h=None, *, center=None, method="plaquette", **solve_kw):
    """Berry curvature from finite differences.

    ``plaquette`` sums link phases around a small rectangle (gauge invariant
    by construction) with one Richardson step; ``curl`` differentiates the
    stencil-gauge Berry connection.
    """
    c = _center(spec, lam, center, solve_kw)
    _check_levels(c, n)
    k = len(c.lam)
    f = np.zeros((k, k))
    if method == "plaquette":
        hh = _steps(c, h, rel=1e-3)
        st = stencil_for(c)
        for i, j in combinations(range(k), 2):
            coarse = _plaquette(st, n, i, j, hh[i], hh[j])
            fine = _plaquette(st, n, i, j, hh[i] / 2, hh[j] / 2)
            f[i, j] = (4.0 * fine - coarse) / 3.0
            f[j, i] = -f[i, j]
    elif method == "curl":
        hh = _steps(c, h, rel=1e-4)
        inner = _steps(c, None)
        st = stencil_for(c)
        a = {}
        for i in range(k):
            for s in (1, -1):
                node = st.shifted(s * hh[i] * _unit(k, i))
                d = _state_derivative_at(st, node.lam, n, inner)
                a[i, s] = (1j * (node.states[:, n].conj() @ d)).real
        for i, j in combinations(range(k), 2):
            f[i, j] = (a[i, 1][j] - a[i, -1][j]) / (2 * hh[i]) - (a[j, 1][i] - a[j, -1][i]) / (2 * hh[j])
            f[j, i] = -f[i, j]
    else:
        raise ValueError(f"unknown curvature method {method!r}")
    return f


def _state_derivative_at(st, lam, n, h):
    k = len(lam)
    base = np.asarray(lam, dtype=float)
    cols = []
    for i in range(k):
        plus = st.at(base + h[i] * _unit(k, i)).states[:, n]
        minus = st.at(base - h[i] * _unit(k, i)).states[:, n]
        cols.append((plus - minus) / (2.0 * h[i]))
    return np.array(cols).T


def r_curvature(spec, lam, n, m, h=None, *, center=None, **solve_kw):
    """``R^(n,m) = F^(n) - F^(m)``, each from gauge-invariant plaquettes."""
    c = _center(spec, lam, center, solve_kw)
    _check_pair(c, n, m)
    return berry_curvature_fd(spec, lam, n, h, center=c) - berry_curvature_fd(spec, lam, m, h, center=c)


def gamma_connection(spec, lam, n, m, h=None, *, center=None, curvature=True, **solve_kw):
    """``Gamma^(n,m) = A^(n) - A^(m)`` in the stencil gauge, plus its curvature."""
    c = _center(spec, lam, center, solve_kw)
    _check_pair(c, n, m)
    a_n = berry_connection_fd(spec, lam, n, h, center=c)
    a_m = berry_connection_fd(spec, lam, m, h, center=c)
    k = len(c.lam)
    r = r_curvature(spec, lam, n, m, center=c) if curvature else np.zeros((k, k))
    return ConnectionPair(a_n, a_m, a_n - a_m, r)


TORSION_ROUTES = ("covariant-fd", "nbein-sum", "hamiltonian")


def torsion(spec, lam, n, m, route="hamiltonian", h=None, *, center=None, **solve_kw):
    """Torsion ``T^(n,m)`` by the covariant-derivative, N-bein-sum or Hamiltonian route."""
    c = _center(spec, lam, center, solve_kw)
    _check_pair(c, n, m)
    if route == "nbein-sum":
        return two_state(c, None, n, m).T
    if route == "hamiltonian":
        return _torsion_hamiltonian(c, n, m)
    if route != "covariant-fd":
        raise ValueError(f"unknown torsion route {route!r}; choose from {TORSION_ROUTES}")
    hh = _steps(c, h)
    st = stencil_for(c)
    k = len(c.lam)
    # de[i, j] = d_i e_j with e taken from each aligned stencil node
    de = np.zeros((k, k), dtype=complex)
    for i in range(k):
        plus = nbein_tensor(st.shifted(hh[i] * _unit(k, i)))[n, m]
        minus = nbein_tensor(st.shifted(-hh[i] * _unit(k, i)))[n, m]
        de[i] = (plus - minus) / (2.0 * hh[i])
    gamma = berry_connection_fd(spec, lam, n, hh, center=c) - berry_connection_fd(spec, lam, m, hh, center=c)
    e = nbein_tensor(c)[n, m]
    ge = np.outer(gamma, e)
    return de - de.T + 1j * (ge - ge.T)


def first_order_overlap_check(spec, lam, delta, n, m, *, center=None, **solve_kw):
    """Compare ``<m(lam)|n(lam + delta)>`` with ``-i sum_i e^(n)_{i m} delta^i``."""
    c = _center(spec, lam, center, solve_kw)
    _check_pair(c, n, m)
    delta = np.asarray(delta, dtype=float)
    node = stencil_for(c).shifted(delta)
    exact = complex(np.vdot(c.states[:, m], node.states[:, n]))
    predicted = complex(-1j * (nbein_tensor(c)[n, m] @ delta))
    return exact, predicted, abs(exact - predicted)


def bianchi_residuals(spec, lam, n, m, h=None, *, center=None, **solve_kw):
    """Cyclic residuals of ``dR = 0`` and ``dT + i Gamma^T - i R^e = 0``.

    Node values of ``R`` and ``T`` are spectral, taken at aligned stencil
    nodes; derivatives are central differences. Fewer than three parameters
    admit no 3-forms, so both residuals are exactly zero.
    """
    c = _center(spec, lam, center, solve_kw)
    _check_pair(c, n, m)
    k = len(c.lam)
    if k < 3:
        return 0.0, 0.0
    hh = _steps(c, h)
    st = stencil_for(c)

    def r_spec(b):
        return qgt(b, None, n).F - qgt(b, None, m).F

    d_r, d_t = {}, {}
    for i in range(k):
        plus, minus = st.shifted(hh[i] * _unit(k, i)), st.shifted(-hh[i] * _unit(k, i))
        d_r[i] = (r_spec(plus) - r_spec(minus)) / (2.0 * hh[i])
        d_t[i] = (two_state(plus, None, n, m).T - two_state(minus, None, n, m).T) / (2.0 * hh[i])
    gamma = berry_connection_fd(spec, lam, n, hh, center=c) - berry_connection_fd(spec, lam, m, hh, center=c)
    t = two_state(c, None, n, m).T
    r = r_spec(c)
    e = nbein_tensor(c)[n, m]
    res_r = res_t = 0.0
    for a, b, d in combinations(range(k), 3):
        cyc = [(a, b, d), (b, d, a), (d, a, b)]
        res_r = max(res_r, abs(sum(d_r[x][y, z] for x, y, z in cyc)))
        s = sum(d_t[x][y, z] + 1j * gamma[x] * t[y, z] - 1j * r[y, z] * e[x] for x, y, z in cyc)
        res_t = max(res_t, abs(s))
    return float(res_r), float(res_t)
