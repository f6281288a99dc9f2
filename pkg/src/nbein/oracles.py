"""Closed-form reference values for the two oscillator families.

Everything here is transcribed by hand from the analytic solutions and
deliberately shares no code with the numerical pipeline (the scalar
invariants are contracted with ``numpy.linalg.inv``, not the adjugate used in
``invariants``). Quantities for levels below zero vanish.

Example 1: ``H = (q^2 + Z p^2)/2 + W q``, parameters ``(W, Z)``.
Example 2: ``H = (q^2 + Y(qp + pq) + Z p^2)/2 + W q``, parameters
``(W, Y, Z)``, with ``omega = sqrt(Z - Y^2)``.

Tensor sets are plain dicts: ``energies``, ``nbein`` (dict keyed by the
second level), ``A``, ``g``, ``F``, ``det_g`` and, when ``m`` is given,
``e``, ``M``, ``G``, ``T``, ``Gamma``, ``R`` and ``invariants``.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainViolation, ShapeMismatch

INVARIANT_KEYS = ("g", "F", "R", "det_g", "scalar_curvature", "invariants")


def _sqrt(x):
    return math.sqrt(x) if x > 0 else 0.0


def _contract(xi, theta, g_n, g_m):
    gi_n, gi_m = np.linalg.inv(g_n), np.linalg.inv(g_m)
    nt = np.einsum("ij,kl->ijkl", xi.real, theta.real) + np.einsum("ij,kl->ijkl", xi.imag, theta.imag)
    return float(2.0 * np.einsum("ik,jl,ijkl->", gi_n, gi_m, nt))


def _pair_invariants(parts, g_n, g_m):
    return {f"N_{a}": _contract(parts[a], parts[a], g_n, g_m) for a in ("M", "G", "T")}


# ---------------------------------------------------------------------------
# example 1


def _ex1_nbeins(n, Z, hbar):
    out = {}
    if n >= 1:
        out[n - 1] = 1j / Z**0.25 * math.sqrt(n / (2 * hbar)) * np.array([1.0, 0.0])
    out[n + 1] = -1j / Z**0.25 * math.sqrt((n + 1) / (2 * hbar)) * np.array([1.0, 0.0])
    if n >= 2:
        out[n - 2] = -1j / (8 * Z) * math.sqrt(n * (n - 1)) * np.array([0.0, 1.0])
    out[n + 2] = 1j / (8 * Z) * math.sqrt((n + 1) * (n + 2)) * np.array([0.0, 1.0])
    return out


def _ex1_metric(n, Z, hbar):
    return np.diag([(n + 0.5) / (hbar * math.sqrt(Z)), (n * n + n + 1) / (32 * Z * Z)])


def _ex1_G(n, m, Z, hbar):
    a = m - n
    k = abs(a)
    off = np.array([[0.0, 1.0], [1.0, 0.0]])
    ww = np.array([[1.0, 0.0], [0.0, 0.0]])
    zz = np.array([[0.0, 0.0], [0.0, 1.0]])
    if m < 0 or k == 0 or k > 4:
        return np.zeros((2, 2), complex)
    # c = product of the k levels between (exclusive of the lower, inclusive of the upper)
    lo = min(n, m)
    c = math.prod(range(lo + 1, lo + k + 1))
    if k == 4:
        return (-math.sqrt(c) / (64 * Z * Z) * zz).astype(complex)
    if k == 3:
        return (math.sqrt(c / (2 * hbar)) / (8 * Z**1.25) * off).astype(complex)
    if k == 2:
        return (-math.sqrt(c / Z) / (2 * hbar) * ww).astype(complex)
    return (-c / (8 * Z**1.25) * math.sqrt(c / (2 * hbar)) * off).astype(complex)


def _ex1_T(n, m, Z, hbar):
    j = np.array([[0.0, -1.0], [1.0, 0.0]])
    if m == n - 1 and n >= 1:
        return -1j / (4 * Z**1.25) * math.sqrt(n / (2 * hbar)) * j
    if m == n + 1:
        return 1j / (4 * Z**1.25) * math.sqrt((n + 1) / (2 * hbar)) * j
    return np.zeros((2, 2), complex)


def oracle_example1(n, m=None, lam=(0.0, 1.0), hbar=1.0):
    W, Z = (float(x) for x in lam)
    if not Z > 0:
        raise DomainViolation(f"example 1 needs Z > 0, got {Z}")
    if n < 0 or (m is not None and m < 0):
        raise ValueError("levels must be non-negative")

    def energy(k):
        return hbar * math.sqrt(Z) * (k + 0.5) - W * W / 2

    g = _ex1_metric(n, Z, hbar)
    out = {
        "energies": energy(n),
        "nbein": _ex1_nbeins(n, Z, hbar),
        "A": np.zeros(2),
        "g": g,
        "F": np.zeros((2, 2)),
        "det_g": (2 * n + 1) * (n * n + n + 1) / (64 * hbar * Z**2.5),
        "scalar_curvature": -4.0 / (n * n + n + 1),
    }
    if m is not None:
        G, T = _ex1_G(n, m, Z, hbar), _ex1_T(n, m, Z, hbar)
        parts = {"M": G + T / 2j, "G": G, "T": T}
        out.update(
            e=out["nbein"].get(m, np.zeros(2, complex)),
            energy_m=energy(m),
            Gamma=np.zeros(2),
            R=np.zeros((2, 2)),
            invariants=_pair_invariants(parts, g, _ex1_metric(m, Z, hbar)),
            **parts,
        )
    return out


def torsion_invariant_example1(n):
    """``N_T^(n,n+1)`` of example 1 in closed form."""
    return 2 * (n + 1) * (1 / ((n + 0.5) * (n * n + 3 * n + 3)) + 1 / ((n + 1.5) * (n * n + n + 1)))


# ---------------------------------------------------------------------------
# example 2


def _omega(Y, Z):
    w2 = Z - Y * Y
    if not Z > 0 or not w2 > 0:
        raise DomainViolation(f"example 2 needs Z > 0 and Z - Y^2 > 0, got Z={Z}, Y={Y}")
    return math.sqrt(w2)


def _ex2_nbeins(n, W, Y, Z, hbar):
    om = _omega(Y, Z)
    v = np.array([0.0, Z, -Y])
    u1 = np.array([Z * om**2, 2 * W * Y * Z, -W * Y * Y])
    u2 = np.array([0.0, 2 * Y * Z, Z - 2 * Y * Y])
    out = {}
    if n >= 1:
        out[n - 1] = -W * math.sqrt(n / (2 * hbar * Z * om**5)) * v + 1j * math.sqrt(n / (2 * hbar * Z * om**7)) * u1
    out[n + 1] = -W * math.sqrt((n + 1) / (2 * hbar * Z * om**5)) * v - 1j * math.sqrt((n + 1) / (2 * hbar * Z * om**7)) * u1
    if n >= 2:
        c = math.sqrt(n * (n - 1))
        out[n - 2] = c / (4 * Z * om) * v - 1j * c / (8 * Z * om**2) * u2
    c = math.sqrt((n + 1) * (n + 2))
    out[n + 2] = c / (4 * Z * om) * v + 1j * c / (8 * Z * om**2) * u2
    return out


def _ex2_metric(n, W, Y, Z, hbar):
    om = _omega(Y, Z)
    a = np.array(
        [
            [Z * om**4, 2 * W * Y * Z * om**2, -W * Y * Y * om**2],
            [2 * W * Y * Z * om**2, W * W * Z * (3 * Y * Y + Z), -W * W * Y * (Y * Y + Z)],
            [-W * Y * Y * om**2, -W * W * Y * (Y * Y + Z), W * W * Y * Y],
        ]
    )
    b = np.array([[0.0, 0.0, 0.0], [0.0, 4 * Z, -2 * Y], [0.0, -2 * Y, 1.0]])
    return (n + 0.5) / (hbar * om**7) * a + (n * n + n + 1) / (32 * om**4) * b


def _ex2_curvature(n, W, Y, Z, hbar):
    om = _omega(Y, Z)
    a = np.array(
        [
            [0.0, Z * om**2, -Y * om**2],
            [-Z * om**2, 0.0, -W * Y * Y],
            [Y * om**2, W * Y * Y, 0.0],
        ]
    )
    return W / (hbar * om**6) * a + (n + 0.5) / (4 * om**3) * _yz()


def _yz():
    return np.array([[0.0, 0.0, 0.0], [0.0, 0.0, -1.0], [0.0, 1.0, 0.0]])


def _ex2_G(n, m, W, Y, Z, hbar):
    a = m - n
    k = abs(a)
    if m < 0 or k == 0 or k > 4:
        return np.zeros((3, 3), complex)
    om = _omega(Y, Z)
    s = 1.0 if a < 0 else -1.0  # sign of the imaginary part
    lo = min(n, m)
    c = math.prod(range(lo + 1, lo + k + 1))
    if k == 4:
        re = np.array(
            [
                [0, 0, 0],
                [0, 4 * Z * Z * (Z - 2 * Y * Y), 2 * Y * Z * (4 * Y * Y - 3 * Z)],
                [0, 2 * Y * Z * (4 * Y * Y - 3 * Z), -8 * Y**4 + 8 * Y * Y * Z - Z * Z],
            ]
        )
        im = np.array(
            [
                [0, 0, 0],
                [0, -8 * Y * Z * Z, 2 * Z * (4 * Y * Y - Z)],
                [0, 2 * Z * (4 * Y * Y - Z), 4 * Y * (Z - 2 * Y * Y)],
            ]
        )
        return math.sqrt(c) / (64 * Z * Z * om**4) * (re + s * 1j * om * im)
    if k == 3:
        re = np.array(
            [
                [0, 2 * Y * Z * Z * om**2, Z * om**2 * (Z - 2 * Y * Y)],
                [2 * Y * Z * Z * om**2, 4 * W * Z * Z * (3 * Y * Y - Z), 2 * W * Y * Z * (3 * Z - 5 * Y * Y)],
                [Z * om**2 * (Z - 2 * Y * Y), 2 * W * Y * Z * (3 * Z - 5 * Y * Y), 2 * W * Y * Y * (4 * Y * Y - 3 * Z)],
            ]
        )
        im = np.array(
            [
                [0, 2 * Z * Z * om**2, -2 * Y * Z * om**2],
                [2 * Z * Z * om**2, 12 * W * Y * Z * Z, -W * Z * (9 * Z - 10 * om**2)],
                [-2 * Y * Z * om**2, -W * Z * (9 * Z - 10 * om**2), 2 * W * Y * (4 * Y * Y - Z)],
            ]
        )
        return math.sqrt(c / (2 * hbar * Z**3 * om**11)) / 8 * (re + s * 1j * om * im)
    if k == 2:
        re = np.array(
            [
                [-Z * Z * om**4, -2 * W * Y * Z * Z * om**2, W * Y * Y * Z * om**2],
                [-2 * W * Y * Z * Z * om**2, -W * W * Z * Z * (5 * Y * Y - Z), W * W * Y * Z * (3 * Y * Y - Z)],
                [W * Y * Y * Z * om**2, W * W * Y * Z * (3 * Y * Y - Z), W * W * Y * Y * (Z - 2 * Y * Y)],
            ]
        )
        im = np.array(
            [
                [0, -W * Z * Z * om**2, W * Y * Z * om**2],
                [-W * Z * Z * om**2, -4 * W * W * Y * Z * Z, 3 * W * W * Y * Y * Z],
                [W * Y * Z * om**2, 3 * W * W * Y * Y * Z, -2 * W * W * Y**3],
            ]
        )
        return math.sqrt(c) / (2 * hbar * Z * om**7) * (re + s * 1j * om * im)
    re = np.array(
        [
            [0, -2 * Y * Z * Z * om**2, Z * (2 * Y * Y - Z) * om**2],
            [-2 * Y * Z * Z * om**2, -4 * W * Z * Z * (Y * Y + Z), 2 * W * Y * Z * (Y * Y + Z)],
            [Z * (2 * Y * Y - Z) * om**2, 2 * W * Y * Z * (Y * Y + Z), -2 * W * Y * Y * Z],
        ]
    )
    im = np.array(
        [
            [0, -2 * Z * om**2, 2 * Y * om**2],
            [-2 * Z * om**2, -4 * W * Y * Z, W * (2 * Y * Y + Z)],
            [2 * Y * om**2, W * (2 * Y * Y + Z), -2 * W * Y],
        ]
    )
    return c / 8 * math.sqrt(c / (2 * hbar * Z * om**9)) * (re / (Z * om) + s * 1j * im)


def _ex2_T(n, m, W, Y, Z, hbar):
    a = m - n
    if abs(a) != 1 or m < 0:
        return np.zeros((3, 3), complex)
    om = _omega(Y, Z)
    c = max(n, m)
    s = 1.0 if a < 0 else -1.0
    re = np.array(
        [
            [0, -2 * Z * om**2, 2 * Y * om**2],
            [2 * Z * om**2, 0, W * (Z + 2 * Y * Y)],
            [-2 * Y * om**2, -W * (Z + 2 * Y * Y), 0],
        ]
    )
    im = np.array(
        [
            [0, 2 * Y * Z, Z - 2 * Y * Y],
            [-2 * Y * Z, 0, 2 * W * Y],
            [-Z + 2 * Y * Y, -2 * W * Y, 0],
        ]
    )
    return math.sqrt(c / (32 * hbar * Z * om**9)) * (re + s * 1j * om * im)


def oracle_example2(n, m=None, lam=(0.0, 0.0, 1.0), hbar=1.0):
    W, Y, Z = (float(x) for x in lam)
    om = _omega(Y, Z)
    if n < 0 or (m is not None and m < 0):
        raise ValueError("levels must be non-negative")

    def energy(k):
        return hbar * om * (k + 0.5) - W * W * Z / (2 * om * om)

    v = np.array([0.0, Z, -Y])
    g = _ex2_metric(n, W, Y, Z, hbar)
    det = (n + 0.5) * (n * n + n + 1) * Z * ((n * n + n + 1) * hbar * om**3 + 8 * (n + 0.5) * W * W * Z) / (
        256 * hbar**2 * om**12
    )
    out = {
        "omega": om,
        "energies": energy(n),
        "nbein": _ex2_nbeins(n, W, Y, Z, hbar),
        "A": ((n + 0.5) / (2 * Z * om) + W * W / (2 * hbar * om**4)) * v,
        "g": g,
        "F": _ex2_curvature(n, W, Y, Z, hbar),
        "det_g": det,
    }
    if m is not None:
        G, T = _ex2_G(n, m, W, Y, Z, hbar), _ex2_T(n, m, W, Y, Z, hbar)
        parts = {"M": G + T / 2j, "G": G, "T": T}
        out.update(
            e=out["nbein"].get(m, np.zeros(3, complex)),
            energy_m=energy(m),
            Gamma=(n - m) / (2 * Z * om) * v,
            R=(n - m) / (4 * om**3) * _yz(),
            invariants=_pair_invariants(parts, g, _ex2_metric(m, W, Y, Z, hbar)),
            **parts,
        )
    return out


# ---------------------------------------------------------------------------
# comparison


@dataclass(frozen=True)
class OracleReport:
    label: str
    numeric: object
    oracle: object
    mode: str
    error: float
    tol: float
    passed: bool

    def line(self):
        return f"{self.label:<48s} err={self.error:.3e} tol={self.tol:.1e} {'PASS' if self.passed else 'FAIL'}"


def _error(a, b, mode):
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ShapeMismatch(f"numeric shape {a.shape} does not match oracle shape {b.shape}")
    if mode == "modulus":
        a, b = np.abs(a), np.abs(b)
    if not np.all(np.isfinite(a)):
        return math.inf
    scale = float(np.abs(b).max()) if b.size else 0.0
    diff = float(np.abs(a - b).max()) if b.size else 0.0
    return diff / scale if scale > 0 else diff


def _flatten(d, prefix=""):
    out = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        else:
            out[key] = v
    return out


def compare(numeric, oracle, mode="direct", tol=1e-6, label="quantity"):
    """Relative max-norm error (absolute where the oracle vanishes).

    ``numeric`` and ``oracle`` are arrays, or dict tensor sets compared key by
    key; ``invariant-only`` restricts dicts to gauge-invariant keys.
    """
    if mode not in ("direct", "modulus", "invariant-only"):
        raise ValueError(f"unknown comparison mode {mode!r}")
    if isinstance(oracle, dict):
        if not isinstance(numeric, dict):
            raise ShapeMismatch("a tensor-set oracle needs a tensor-set numeric input")
        keys = [k for k in oracle if mode != "invariant-only" or k in INVARIANT_KEYS]
        missing = [k for k in keys if k not in numeric]
        if missing:
            raise ShapeMismatch(f"numeric set lacks {missing}")
        num = _flatten({k: numeric[k] for k in keys})
        ora = _flatten({k: oracle[k] for k in keys})
        if num.keys() != ora.keys():
            raise ShapeMismatch(f"label mismatch: {sorted(set(num) ^ set(ora))}")
        inner = "modulus" if mode == "modulus" else "direct"
        err = max((_error(num[k], ora[k], inner) for k in ora), default=0.0)
    else:
        err = _error(numeric, oracle, "modulus" if mode == "modulus" else "direct")
    return OracleReport(label, numeric, oracle, mode, err, tol, bool(err <= tol))
