"""The quantum metric as a Riemannian metric: Christoffel symbols, Riemann
tensor and scalar curvature by central differences.

Conventions: ``Gamma[k, i, j] = Gamma^k_ij``;
``R^r_{s m v} = d_m Gamma^r_{v s} - d_v Gamma^r_{m s} + Gamma^r_{m l} Gamma^l_{v s} - Gamma^r_{v l} Gamma^l_{m s}``,
``Ric_{s v} = R^r_{s r v}``; a round sphere has positive scalar curvature.
"""

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .geometry import qgt
from .invariants import metric_inverse
from .spectrum import solve_at

DEFAULT_REL_STEP = 1e-3


def stencil_offsets(k):
    """Integer offsets (in units of h) of the second-order stencil.

    Centre, +-1 and +-2 along each axis, and the four diagonal corners of
    every axis pair: 13 nodes in two dimensions.
    """
    zero = (0,) * k
    out = [zero]
    for i in range(k):
        for s in (1, -1, 2, -2):
            o = list(zero)
            o[i] = s
            out.append(tuple(o))
    for i, j in combinations(range(k), 2):
        for si in (1, -1):
            for sj in (1, -1):
                o = list(zero)
                o[i], o[j] = si, sj
                out.append(tuple(o))
    return out


@dataclass(frozen=True)
class MetricField:
    center: tuple
    steps: np.ndarray
    values: dict  # integer offset tuple -> real symmetric (N, N) metric
    level: int = 0

    @classmethod
    def from_function(cls, fn, center, h, level=0):
        center = np.asarray(center, dtype=float)
        steps = _steps(center, h)
        values = {o: np.asarray(fn(center + np.array(o) * steps), dtype=float) for o in stencil_offsets(len(center))}
        return cls(tuple(center), steps, values, level)

    def at(self, offset):
        return self.values[tuple(offset)]

    @property
    def dim(self):
        return len(self.center)


def _steps(center, h):
    center = np.asarray(center, dtype=float)
    if h is None:
        return DEFAULT_REL_STEP * np.maximum(1.0, np.abs(center))
    h = np.broadcast_to(np.asarray(h, dtype=float), center.shape).copy()
    if np.any(h <= 0):
        raise ValueError("stencil steps must be positive")
    return h


def sample_metric(spec, center, h=None, n=0, *, levels=None, trunc_dim=None, backend="lapack"):
    """Spectral metric ``g^(n)`` at every stencil node (shared truncation)."""
    center = np.asarray(spec.point(center), dtype=float)
    steps = _steps(center, h)
    levels = levels if levels is not None else n + 6
    values = {}
    for o in stencil_offsets(len(center)):
        b = solve_at(spec, center + np.array(o) * steps, trunc_dim, levels, backend=backend)
        values[o] = qgt(b, None, n).g
    return MetricField(tuple(center), steps, values, n)


def _shift(offset, i, s):
    o = list(offset)
    o[i] += s
    return tuple(o)


def _christoffel_at(field, base):
    k = field.dim
    h = field.steps
    dg = np.array([(field.at(_shift(base, i, 1)) - field.at(_shift(base, i, -1))) / (2 * h[i]) for i in range(k)])
    # dg[i, j, l] = d_i g_jl
    gi = metric_inverse(field.at(base))
    lower = 0.5 * (dg + np.transpose(dg, (1, 0, 2)) - np.transpose(dg, (1, 2, 0)))  # [i, j, l]
    return np.einsum("al,ijl->aij", gi, lower)


def christoffel(field):
    """``Gamma^k_ij`` at the stencil centre."""
    return _christoffel_at(field, (0,) * field.dim)


def riemann_tensor(field):
    """``R^r_{s m v}`` at the centre, shape (N, N, N, N) indexed [r, s, m, v]."""
    k = field.dim
    zero = (0,) * k
    gam = _christoffel_at(field, zero)
    dgam = np.array(
        [
            (_christoffel_at(field, _shift(zero, i, 1)) - _christoffel_at(field, _shift(zero, i, -1))) / (2 * field.steps[i])
            for i in range(k)
        ]
    )  # dgam[m, r, v, s] = d_m Gamma^r_vs
    r = (
        np.einsum("mrvs->rsmv", dgam)
        - np.einsum("vrms->rsmv", dgam)
        + np.einsum("rml,lvs->rsmv", gam, gam)
        - np.einsum("rvl,lms->rsmv", gam, gam)
    )
    return r


def ricci_scalar(field):
    r = riemann_tensor(field)
    ric = np.einsum("rsrv->sv", r)
    return float(np.einsum("sv,sv->", metric_inverse(field.at((0,) * field.dim)), ric))


@dataclass(frozen=True)
class CurvatureEstimate:
    value: float  # Richardson combination of the two step sizes
    error: float  # step-halving error estimate of the plain estimate at h
    fine: float  # plain estimate at h
    coarse: float  # plain estimate at 2h
    steps: np.ndarray


def scalar_curvature(spec, center, h=None, n=0, **kw):
    """Scalar curvature of ``g^(n)`` with a step-halving error estimate.

    Evaluated at steps ``2h`` and ``h``; the reported value removes the
    leading ``O(h^2)`` term. Going below ``h ~ 1e-3`` makes the second
    differences of the metric noise-dominated.
    """
    steps = _steps(spec.point(center), h)
    coarse = ricci_scalar(sample_metric(spec, center, 2 * steps, n, **kw))
    fine = ricci_scalar(sample_metric(spec, center, steps, n, **kw))
    return CurvatureEstimate((4 * fine - coarse) / 3, abs(fine - coarse) / 3, fine, coarse, steps)
