"""Truncated single-mode bosonic operators.

The number basis |0>, ..., |D-1> is cut off at ``trunc_dim = D``. Anything
that couples across the cutoff (the top ``k`` rows/columns of a degree-``k``
monomial) is unreliable and callers restrict checks to the leading block.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DimensionTooSmall, UnsupportedDescriptor


@dataclass(frozen=True)
class TruncatedOperator:
    matrix: np.ndarray
    trunc_dim: int
    hbar: float
    label: str


# Operator-monomial descriptors. Immutable so they can key caches.

@dataclass(frozen=True)
class Atom:
    name: str  # "q", "p" or "id"

    def __str__(self):
        return self.name

    @property
    def degree(self):
        return 0 if self.name == "id" else 1


@dataclass(frozen=True)
class Power:
    base: object
    exponent: int

    def __str__(self):
        inner = str(self.base)
        if isinstance(self.base, Product):
            inner = f"({inner})"
        return f"{inner}^{self.exponent}"

    @property
    def degree(self):
        return self.base.degree * self.exponent


@dataclass(frozen=True)
class Sym:
    """Symmetrised product (XY + YX)/2 of exactly two factors."""

    factors: tuple

    def __str__(self):
        return "sym(" + "*".join(str(f) for f in self.factors) + ")"

    @property
    def degree(self):
        return sum(f.degree for f in self.factors)


@dataclass(frozen=True)
class Product:
    factors: tuple

    def __str__(self):
        return "*".join(str(f) for f in self.factors)

    @property
    def degree(self):
        return sum(f.degree for f in self.factors)


def _check_dim(trunc_dim):
    if int(trunc_dim) != trunc_dim or trunc_dim < 2:
        raise DimensionTooSmall(f"trunc_dim must be an integer >= 2, got {trunc_dim}")
    return int(trunc_dim)


def ladder(trunc_dim):
    """Annihilation and creation operators on the truncated number basis."""
    d = _check_dim(trunc_dim)
    a = np.diag(np.sqrt(np.arange(1, d, dtype=float)), 1).astype(complex)
    return (
        TruncatedOperator(a, d, 1.0, "a"),
        TruncatedOperator(a.conj().T.copy(), d, 1.0, "a+"),
    )


def quadratures(trunc_dim, hbar=1.0):
    """Position ``q = sqrt(hbar/2)(a + a+)`` and momentum ``p = i sqrt(hbar/2)(a+ - a)``."""
    if hbar <= 0:
        raise ValueError(f"hbar must be positive, got {hbar}")
    q, p = _quadrature_matrices(_check_dim(trunc_dim), float(hbar))
    return (
        TruncatedOperator(q, q.shape[0], float(hbar), "q"),
        TruncatedOperator(p, p.shape[0], float(hbar), "p"),
    )


@lru_cache(maxsize=64)
def _quadrature_matrices(d, hbar):
    a = np.diag(np.sqrt(np.arange(1, d, dtype=float)), 1).astype(complex)
    ad = a.conj().T
    c = np.sqrt(hbar / 2.0)
    q = c * (a + ad)
    p = 1j * c * (ad - a)
    q.setflags(write=False)
    p.setflags(write=False)
    return q, p


def _evaluate(desc, d, hbar):
    if isinstance(desc, Atom):
        if desc.name == "id":
            return np.eye(d, dtype=complex)
        q, p = _quadrature_matrices(d, hbar)
        if desc.name == "q":
            return q.copy()
        if desc.name == "p":
            return p.copy()
        raise UnsupportedDescriptor(f"unknown operator atom {desc.name!r}")
    if isinstance(desc, Power):
        if desc.exponent < 0:
            raise UnsupportedDescriptor("negative operator powers are not supported")
        return np.linalg.matrix_power(_evaluate(desc.base, d, hbar), desc.exponent)
    if isinstance(desc, Sym):
        if len(desc.factors) != 2:
            raise UnsupportedDescriptor(f"sym() takes exactly two factors, got {len(desc.factors)}")
        x = _evaluate(desc.factors[0], d, hbar)
        y = _evaluate(desc.factors[1], d, hbar)
        return 0.5 * (x @ y + y @ x)
    if isinstance(desc, Product):
        out = np.eye(d, dtype=complex)
        for f in desc.factors:
            out = out @ _evaluate(f, d, hbar)
        return out
    raise UnsupportedDescriptor(f"not an operator descriptor: {desc!r}")


@lru_cache(maxsize=256)
def _monomial_cached(desc, d, hbar):
    m = _evaluate(desc, d, hbar)
    m.setflags(write=False)
    return m


def build_monomial(descriptor, trunc_dim, hbar=1.0):
    """Matrix of an operator monomial, multiplied strictly left to right."""
    d = _check_dim(trunc_dim)
    if hbar <= 0:
        raise ValueError(f"hbar must be positive, got {hbar}")
    m = _monomial_cached(descriptor, d, float(hbar))
    return TruncatedOperator(m, d, float(hbar), str(descriptor))
