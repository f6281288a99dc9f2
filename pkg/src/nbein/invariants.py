"""Gauge-invariant four-index tensors and their scalar contractions.

For two complex tensors Xi, Theta that pick up the same phase under a gauge
transformation, ``Re(Xi Theta*)`` and ``Im(Xi* Theta)``-type products are
invariant. Written out in real parts:

    N_ijkl = Re Xi_ij Re Theta_kl + Im Xi_ij Im Theta_kl
    A_ijkl = Re Xi_ij Im Theta_kl - Im Xi_ij Re Theta_kl
"""

from dataclasses import dataclass
from itertools import product

import numpy as np

from .errors import ShapeMismatch, SingularMetric
from .geometry import qgt, two_state

LABELS = ("M", "G", "T")
DET_RTOL = 1e-12


@dataclass(frozen=True)
class InvariantTensor:
    kind: str  # "N" or "A"
    xi_label: str
    theta_label: str
    values: np.ndarray  # real (N, N, N, N)


@dataclass(frozen=True)
class ScalarInvariant:
    value: float
    levels: tuple
    xi_label: str
    theta_label: str


@dataclass(frozen=True)
class InvariantSet:
    levels: tuple
    tensors: dict  # (kind, xi, theta) -> InvariantTensor
    scalars: dict  # (xi, theta) -> ScalarInvariant for N-kind
    reverse_scalars: dict  # same contractions with (m, n)
    symmetry_residual: float  # max |N(n,m) - N(m,n)| over the diagonal labels


def pair_tensor(xi, theta, kind="N", xi_label="Xi", theta_label="Theta"):
    xi, theta = np.asarray(xi), np.asarray(theta)
    if xi.shape != theta.shape or xi.ndim != 2 or xi.shape[0] != xi.shape[1]:
        raise ShapeMismatch(f"need equal square tensors, got {xi.shape} and {theta.shape}")
    if kind == "N":
        v = np.einsum("ij,kl->ijkl", xi.real, theta.real) + np.einsum("ij,kl->ijkl", xi.imag, theta.imag)
    elif kind == "A":
        v = np.einsum("ij,kl->ijkl", xi.real, theta.imag) - np.einsum("ij,kl->ijkl", xi.imag, theta.real)
    else:
        raise ValueError(f"kind must be 'N' or 'A', got {kind!r}")
    return InvariantTensor(kind, xi_label, theta_label, v)


def metric_inverse(g):
    """Inverse of a small real symmetric metric; adjugate up to 3x3, LU beyond."""
    g = np.asarray(g, dtype=float)
    k = g.shape[0]
    scale = np.abs(g).max() ** k if g.size else 0.0
    if k <= 3:
        det, adj = _adjugate(g)
    else:
        det = np.linalg.det(g)
        adj = None
    if scale == 0.0 or abs(det) <= DET_RTOL * scale:
        raise SingularMetric(f"metric determinant {det:.3e} is below {DET_RTOL:g} x scale")
    return adj / det if adj is not None else np.linalg.inv(g)


def _adjugate(g):
    k = g.shape[0]
    if k == 1:
        return g[0, 0], np.ones((1, 1))
    if k == 2:
        adj = np.array([[g[1, 1], -g[0, 1]], [-g[1, 0], g[0, 0]]])
        return g[0, 0] * g[1, 1] - g[0, 1] * g[1, 0], adj
    cof = np.empty((3, 3))
    for i, j in product(range(3), repeat=2):
        r = [x for x in range(3) if x != i]
        c = [x for x in range(3) if x != j]
        minor = g[np.ix_(r, c)]
        cof[i, j] = (-1) ** (i + j) * (minor[0, 0] * minor[1, 1] - minor[0, 1] * minor[1, 0])
    det = float(g[0] @ cof[0])
    return det, cof.T


def scalar_invariant(n_tensor, g_n, g_m, levels=(None, None)):
    """``2 g_n^{ik} g_m^{jl} N_ijkl``."""
    if n_tensor.kind != "N":
        raise ValueError("only N-kind tensors contract to a scalar")
    gi_n, gi_m = metric_inverse(g_n), metric_inverse(g_m)
    value = 2.0 * np.einsum("ik,jl,ijkl->", gi_n, gi_m, n_tensor.values)
    return ScalarInvariant(float(value), tuple(levels), n_tensor.xi_label, n_tensor.theta_label)


def _parts(bundle, n, m):
    ts = two_state(bundle, None, n, m)
    return {"M": ts.M, "G": ts.G, "T": ts.T}


def invariant_report(bundle, n, m):
    """All N/A tensors over Xi, Theta in {M, G, T} and the N-kind scalars."""
    parts = _parts(bundle, n, m)
    rev = _parts(bundle, m, n)
    g_n = qgt(bundle, None, n).g
    g_m = qgt(bundle, None, m).g
    tensors, scalars, reverse = {}, {}, {}
    for a, b in product(LABELS, repeat=2):
        for kind in ("N", "A"):
            tensors[kind, a, b] = pair_tensor(parts[a], parts[b], kind, a, b)
        scalars[a, b] = scalar_invariant(tensors["N", a, b], g_n, g_m, (n, m))
        reverse[a, b] = scalar_invariant(pair_tensor(rev[a], rev[b], "N", a, b), g_m, g_n, (m, n))
    sym = max(abs(scalars[a, a].value - reverse[a, a].value) for a in LABELS)
    return InvariantSet((n, m), tensors, scalars, reverse, float(sym))
