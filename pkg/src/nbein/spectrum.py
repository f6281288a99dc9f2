"""Gauge-fixed eigen-bundles of a parametrized Hamiltonian.

The eigensolver hands back eigenvectors with arbitrary phases. Everything
that differentiates states (finite-difference N-beins, Berry connections,
curvatures) needs a smooth local gauge, so every bundle records how its
phases were fixed and stencil points are aligned to their centre.

Gauge policies:

``largest-real-positive``
    each state's largest-modulus Fock amplitude is made real positive.
``reference-overlap``
    states are matched to a reference bundle and phased so that
    ``<ref_n|n>`` is real positive.
``dressed-real``
    for a dressing ``(f, O)`` the state ``exp(i f O)|n>`` is made real
    (largest-modulus entry positive) and ``|n> = exp(-i f O)`` of it. With a
    reference the overall sign is chosen so ``Re <ref_n|n> > 0``. This is the
    coordinate-wavefunction gauge of the quadratic-oscillator family.
"""

from dataclasses import dataclass, field, replace
from functools import cached_property, lru_cache

import numpy as np

from .errors import AmbiguousMatch, DegenerateSpectrum, DimensionTooSmall, NoConvergence, UnsupportedDescriptor
from .fock import Atom, Power, quadratures
from .hamdsl import BUILTIN_FAMILIES, assemble, parse_coeff, parse_family
from .linalg import hermitian_eigendecompose

GAP_TOL = 1e-8
MATCH_THRESHOLD = 0.5
TRUNC_CAP = 2048
POLICIES = ("largest-real-positive", "reference-overlap", "dressed-real")


def default_levels(n_max):
    return int(n_max) + 6


def default_trunc(levels):
    return 4 * int(levels) + 40


@dataclass(frozen=True)
class GaugePolicy:
    kind: str = "largest-real-positive"
    reference: object = None  # EigenBundle for reference-overlap / dressed sign
    dressing: tuple = None  # (phase expression text, operator text) for dressed-real

    def __post_init__(self):
        if self.kind not in POLICIES:
            raise ValueError(f"unknown gauge policy {self.kind!r}; choose from {POLICIES}")
        if self.kind == "reference-overlap" and self.reference is None:
            raise ValueError("reference-overlap gauge needs a reference bundle")
        if self.kind == "dressed-real" and self.dressing is None:
            raise ValueError("dressed-real gauge needs a (phase, operator) dressing")

    @property
    def tag(self):
        return self.kind

    def anchored(self, reference):
        """The policy used at stencil nodes around a centre bundle."""
        if self.kind == "dressed-real":
            return GaugePolicy("dressed-real", reference, self.dressing)
        return GaugePolicy("reference-overlap", reference)


def dressed_gauge(spec):
    """Dressed gauge for built-in families that declare one, else the default."""
    d = BUILTIN_FAMILIES.get(spec.name, {}).get("dressing")
    return GaugePolicy("dressed-real", dressing=d) if d else GaugePolicy()


@dataclass(frozen=True, eq=False)
class EigenBundle:
    spec: object
    lam: tuple
    energies: np.ndarray  # retained levels, ascending
    states: np.ndarray  # (trunc_dim, levels), gauge-fixed columns
    trunc_dim: int
    gauge: str
    hamiltonian: np.ndarray = field(repr=False)
    derivatives: tuple = field(repr=False)
    spectral_range: float = 0.0
    policy: GaugePolicy = field(default_factory=GaugePolicy, repr=False)
    backend: str = "lapack"
    gap_tol: float = GAP_TOL
    phases: tuple = None  # injected phase expressions alpha_n, if any
    raw_states: np.ndarray = field(default=None, repr=False)  # states before phases

    @property
    def levels(self):
        return self.states.shape[1]

    @cached_property
    def projected(self):
        """``X[i] = V^dagger dH_i V`` on the retained levels."""
        v = self.states
        return np.array([v.conj().T @ d @ v for d in self.derivatives])

    def energy_gap(self, n, m):
        return self.energies[n] - self.energies[m]


def _largest_real_positive(v):
    v = v.copy()
    for k in range(v.shape[1]):
        j = int(np.argmax(np.abs(v[:, k])))
        v[:, k] *= abs(v[j, k]) / v[j, k]
        v[j, k] = v[j, k].real  # drop the rounding residue of the pivot
    return v


def _dressing_power(spec, operator_text):
    desc = parse_family(operator_text, spec.parameter_names, hbar=spec.hbar).terms[0].op
    if desc == Atom("q"):
        return 1
    if isinstance(desc, Power) and desc.base == Atom("q"):
        return desc.exponent
    raise UnsupportedDescriptor(f"dressing operator must be a power of q, got {desc}")


@lru_cache(maxsize=16)
def _q_basis(trunc_dim, hbar):
    """Eigen-basis of the truncated position operator (a discrete q grid)."""
    x, u = np.linalg.eigh(quadratures(trunc_dim, hbar)[0].matrix)
    x.setflags(write=False)
    u.setflags(write=False)
    return x, u


def _dressed_real(spec, lam, v, dressing):
    phase_text, op_text = dressing
    f = parse_coeff(phase_text, spec.parameter_names).evaluate(spec.env(lam))
    x, u = _q_basis(v.shape[0], spec.hbar)
    forward = np.exp(1j * f * x ** _dressing_power(spec, op_text))[:, None]
    w = u @ (forward * (u.conj().T @ v))
    w = _largest_real_positive(w)
    return u @ (forward.conj() * (u.conj().T @ w))


def match_states(a, b):
    """Greedy level matching of bundle ``b`` onto bundle ``a``.

    Returns ``perm`` with ``b.states[:, perm[n]]`` the partner of
    ``a.states[:, n]``.
    """
    sa, sb = _states(a), _states(b)
    if sa.shape != sb.shape:
        raise ValueError(f"cannot match bundles with shapes {sa.shape} and {sb.shape}")
    overlap = np.abs(sa.conj().T @ sb)
    k = overlap.shape[0]
    order = np.argsort(-overlap, axis=None, kind="stable")
    perm = -np.ones(k, dtype=int)
    taken = np.zeros(k, dtype=bool)
    for flat in order:
        i, j = divmod(int(flat), k)
        if perm[i] < 0 and not taken[j]:
            perm[i] = j
            taken[j] = True
    worst = overlap[np.arange(k), perm].min() if k else 1.0
    if worst <= MATCH_THRESHOLD:
        n = int(np.argmin(overlap[np.arange(k), perm]))
        raise AmbiguousMatch(f"level {n} has best overlap {worst:.3f} <= {MATCH_THRESHOLD}")
    return perm


def _states(x):
    return x.raw_states if isinstance(x, EigenBundle) else np.asarray(x)


def _check_gaps(energies, spectral_range, gap_tol):
    if len(energies) < 2:
        return
    gaps = np.diff(energies)
    floor = gap_tol * spectral_range
    k = int(np.argmin(gaps))
    if spectral_range == 0.0 or gaps[k] <= floor:
        raise DegenerateSpectrum(
            f"levels {k} and {k + 1} are degenerate (gap {gaps[k]:.3e}, tolerance {floor:.3e})"
        )


def solve_at(spec, lam, trunc_dim=None, levels=None, gauge=None, *, backend="lapack", gap_tol=GAP_TOL):
    """Diagonalise ``H(lam)`` and keep the lowest ``levels`` gauge-fixed states."""
    levels = int(levels) if levels is not None else 12
    trunc_dim = int(trunc_dim) if trunc_dim is not None else default_trunc(levels)
    if levels < 1:
        raise ValueError("levels must be at least 1")
    if levels > trunc_dim - 4:
        raise DimensionTooSmall(f"levels {levels} exceeds trunc_dim - 4 = {trunc_dim - 4}")
    gauge = gauge or GaugePolicy()
    lam = spec.point(lam)
    h, dh = assemble(spec, lam, trunc_dim)
    eig = hermitian_eigendecompose(h, backend=backend)
    spectral_range = float(eig.eigenvalues[-1] - eig.eigenvalues[0])
    energies = eig.eigenvalues[:levels].copy()
    _check_gaps(energies, spectral_range, gap_tol)
    v = eig.eigenvectors[:, :levels]

    ref = gauge.reference
    if ref is not None:
        if ref.trunc_dim != trunc_dim or ref.levels != levels:
            raise ValueError("reference bundle must share trunc_dim and levels")
        perm = match_states(ref.raw_states, v)
        v = v[:, perm]
        energies = energies[perm]
    if gauge.kind == "largest-real-positive":
        v = _largest_real_positive(v)
    elif gauge.kind == "dressed-real":
        v = _dressed_real(spec, lam, v, gauge.dressing)
    if ref is not None:
        ov = np.einsum("ij,ij->j", ref.raw_states.conj(), v)
        if gauge.kind == "reference-overlap":
            v = v * (np.abs(ov) / ov)[None, :]
        else:
            v = v * np.where(ov.real < 0, -1.0, 1.0)[None, :]
    v = np.ascontiguousarray(v)
    return EigenBundle(
        spec=spec,
        lam=lam,
        energies=energies,
        states=v,
        trunc_dim=trunc_dim,
        gauge=gauge.tag,
        hamiltonian=h,
        derivatives=tuple(dh),
        spectral_range=spectral_range,
        policy=gauge,
        backend=backend,
        gap_tol=gap_tol,
        raw_states=v,
    )


def _phase_exprs(spec, phases):
    return tuple(parse_coeff(p, spec.parameter_names) if isinstance(p, str) else p for p in phases)


def apply_gauge(bundle, phases):
    """Multiply state ``n`` by ``exp(i alpha_n(lam))``; energies untouched."""
    exprs = _phase_exprs(bundle.spec, phases)
    if len(exprs) != bundle.levels:
        raise ValueError(f"need one phase per retained level ({bundle.levels}), got {len(exprs)}")
    env = bundle.spec.env(bundle.lam)
    alpha = np.array([e.evaluate(env) for e in exprs], dtype=float)
    states = bundle.raw_states * np.exp(1j * alpha)[None, :]
    return replace(bundle, states=states, phases=exprs, gauge=f"{bundle.gauge}+phases")


class Stencil:
    """Bundles at points near a centre, aligned to it and memoised by point.

    Nodes are matched and phased against the centre's pre-phase states; any
    phases injected into the centre are then re-evaluated at each node, so
    finite differences see the transformed gauge ``exp(i alpha_n(lam))``.
    """

    def __init__(self, center):
        self.center = center
        self.policy = center.policy.anchored(center)
        self._cache = {center.lam: center}

    def at(self, lam):
        key = tuple(float(x) for x in lam)
        b = self._cache.get(key)
        if b is None:
            c = self.center
            b = solve_at(
                c.spec, key, c.trunc_dim, c.levels, self.policy, backend=c.backend, gap_tol=c.gap_tol
            )
            if c.phases is not None:
                b = apply_gauge(b, c.phases)
            self._cache[key] = b
        return b

    def shifted(self, offsets):
        return self.at(np.asarray(self.center.lam) + np.asarray(offsets, dtype=float))


def default_steps(lam, rel=1e-5):
    lam = np.asarray(lam, dtype=float)
    return rel * np.maximum(1.0, np.abs(lam))


def _metric_all(spec, lam, levels, trunc_dim, backend):
    """Metric of levels ``0..levels-1`` summed over the whole truncated space."""
    h, dh = assemble(spec, lam, trunc_dim)
    eig = hermitian_eigendecompose(h, backend=backend)
    e, v = eig.eigenvalues, eig.eigenvectors
    x = np.array([v.conj().T @ d @ v[:, :levels] for d in dh])  # (N, D, levels)
    out = []
    for n in range(levels):
        de = e[n] - e
        de[n] = np.inf
        col = x[:, :, n] / de[None, :]
        out.append((col.conj() @ col.T).real)
    return np.array(out)


def converge_truncation(spec, lam, levels, tol, *, d0=None, cap=TRUNC_CAP, backend="lapack", return_delta=False):
    """Smallest ``D`` in ``d0, 2 d0, ...`` whose metrics match those at ``2D`` to ``tol``."""
    if not tol > 0:
        raise NoConvergence(f"tolerance must be positive, got {tol}")
    lam = spec.point(lam)
    d = int(d0) if d0 is not None else default_trunc(levels)
    g = _metric_all(spec, lam, levels, d, backend)
    while 2 * d <= cap:
        g2 = _metric_all(spec, lam, levels, 2 * d, backend)
        delta = float(np.abs(g - g2).max())
        if delta <= tol:
            return (d, delta) if return_delta else d
        d, g = 2 * d, g2
    raise NoConvergence(f"metric not converged to {tol:g} below trunc_dim cap {cap}")
