"""Acceptance checks, grouped by criterion and by suite.

Each criterion collects ``Check`` records (label, error, tolerance, verdict)
and passes when all of them do. Oracles are always evaluated at the
reference ``hbar = 1``; the ``hbar`` argument only changes the Hamiltonian
that is solved, which makes it a fault-injection knob.
"""

from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .geometry import (
    TORSION_ROUTES,
    berry_connection_fd,
    bianchi_residuals,
    first_order_overlap_check,
    gamma_connection,
    nbein_fd,
    nbein_tensor,
    qgt,
    r_curvature,
    theta_eta_split,
    torsion,
    two_state,
)
from .hamdsl import builtin_family, differentiate_coeff, parse_coeff
from .invariants import LABELS, invariant_report
from .oracles import compare, oracle_example1, oracle_example2
from .riemann import scalar_curvature
from .spectrum import apply_gauge, dressed_gauge, solve_at

EX1_POINTS = [(w, z) for w in (0.0, 1.0) for z in (0.5, 1.0, 2.0)]
EX2_POINTS = [(0.0, 0.0, 1.0), (1.0, 0.3, 1.0), (0.5, -0.4, 1.5)]


@dataclass(frozen=True)
class Check:
    label: str
    error: float
    tol: float
    passed: bool

    def line(self):
        return f"{self.label:<56s} err={self.error:.3e} tol={self.tol:.1e} {'PASS' if self.passed else 'FAIL'}"


def check(label, error, tol):
    error = float(error)
    return Check(label, error, tol, bool(np.isfinite(error) and error <= tol))


def relation(label, ok):
    """An order relation: error 0 when it holds, 1 when it does not."""
    return Check(label, 0.0 if ok else 1.0, 0.0, bool(ok))


@dataclass(frozen=True)
class Criterion:
    number: int
    title: str
    checks: list = field(default_factory=list)

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    @property
    def worst(self):
        def ratio(c):
            if c.tol > 0:
                return c.error / c.tol
            return 0.0 if c.passed else np.inf

        return max(self.checks, key=ratio)

    def line(self):
        w = self.worst
        verdict = "PASS" if self.passed else "FAIL"
        return (
            f"criterion {self.number:2d} {verdict} {self.title} "
            f"[{len(self.checks)} checks; worst: {w.label} err={w.error:.3e} tol={w.tol:.1e}]"
        )


# ---------------------------------------------------------------------------
# example 1


def criterion_1(hbar=1.0):
    spec = builtin_family("example1", hbar)
    out = []
    for lam in EX1_POINTS:
        c = solve_at(spec, lam, levels=12)
        g_err = f_err = 0.0
        for n in range(7):
            q = qgt(c, None, n)
            g_err = max(g_err, compare(q.g, oracle_example1(n, None, lam)["g"]).error)
            f_err = max(f_err, np.abs(q.F).max())
        out += [check(f"ex1 g n<=6 at W,Z={lam}", g_err, 1e-6), check(f"ex1 F=0 n<=6 at W,Z={lam}", f_err, 1e-8)]
    return Criterion(1, "example-1 metric and vanishing Berry curvature", out)


def criterion_2(hbar=1.0):
    spec = builtin_family("example1", hbar)
    out = []
    for n in range(5):
        r = scalar_curvature(spec, (1.0, 1.0), n=n)
        out.append(check(f"ex1 scalar curvature n={n}", abs(r.value - oracle_example1(n)["scalar_curvature"]), 1e-3))
    values = [scalar_curvature(spec, lam, n=0).value for lam in [(0.0, 0.5), (1.0, 1.0), (0.3, 2.0)]]
    out.append(check("ex1 curvature spread over three centres", max(values) - min(values), 1e-3))
    return Criterion(2, "example-1 scalar curvature -4/(n^2+n+1)", out)


def criterion_3(hbar=1.0):
    spec = builtin_family("example1", hbar)
    out = []
    for lam in EX1_POINTS:
        c = solve_at(spec, lam, levels=12)
        err = max(compare(np.linalg.det(qgt(c, None, n).g), oracle_example1(n, None, lam)["det_g"]).error for n in range(7))
        out.append(check(f"ex1 det g n<=6 at W,Z={lam}", err, 1e-6))
    return Criterion(3, "example-1 metric determinant", out)


def criterion_4(hbar=1.0):
    spec = builtin_family("example1", hbar)
    out = []
    for lam in [(1.0, 1.0), (0.0, 0.5)]:
        c = solve_at(spec, lam, levels=16)
        g_err = t_err = t_zero = m_zero = 0.0
        for n in range(7):
            for m in range(max(0, n - 6), n + 7):
                if m == n:
                    continue
                ts = two_state(c, None, n, m)
                o = oracle_example1(n, m, lam)
                a = abs(m - n)
                if a <= 4:
                    g_err = max(g_err, compare(ts.G, o["G"], "modulus").error)
                if a == 1:
                    t_err = max(t_err, compare(ts.T, o["T"], "modulus").error)
                elif a <= 4:
                    t_zero = max(t_zero, np.abs(ts.T).max())
                else:
                    m_zero = max(m_zero, np.abs(ts.M).max())
        out += [
            check(f"ex1 |G(n,n+-a)| a<=4 at {lam}", g_err, 1e-6),
            check(f"ex1 |T(n,n+-1)| at {lam}", t_err, 1e-6),
            check(f"ex1 T(n,n+-a)=0 a=2..4 at {lam}", t_zero, 1e-6),
            check(f"ex1 M(n,m)=0 |n-m|>4 at {lam}", m_zero, 1e-6),
        ]
    return Criterion(4, "example-1 two-state tensors", out)


def criterion_5(hbar=1.0):
    spec = builtin_family("example1", hbar)
    c = solve_at(spec, (0.3, 1.2), levels=14)
    nt = invariant_report(c, 0, 1).scalars["T", "T"].value
    nm = invariant_report(c, 0, 2).scalars["M", "M"].value
    out = [check("ex1 N_T(0,1) = 8/3", abs(nt - 8 / 3) / (8 / 3), 1e-6), check("ex1 N_M(0,2) = 4/5", abs(nm - 0.8) / 0.8, 1e-6)]
    pairs = [(n, n + a) for n in range(4) for a in range(1, 5)] + [(n, n - a) for n in range(4) for a in range(1, 5) if n - a >= 0]
    table = {}
    for lam in product((0.0, 0.5, 1.0), (0.5, 1.0, 2.0)):
        b = solve_at(spec, lam, levels=14)
        for n, m in pairs:
            rep = invariant_report(b, n, m)
            for key, s in rep.scalars.items():
                table.setdefault((n, m, key), []).append(s.value)
    spread = max(max(v) - min(v) for v in table.values())
    out.append(check("ex1 invariants constant on 3x3 (W,Z) grid", spread, 1e-8))
    seq = [invariant_report(c, n, n + 1).scalars["T", "T"].value for n in range(7)]
    out.append(relation("ex1 N_T(n,n+1) strictly decreasing n=0..6", all(a > b for a, b in zip(seq, seq[1:]))))
    return Criterion(5, "example-1 scalar invariants", out)


def criterion_14(hbar=1.0):
    spec = builtin_family("example1", hbar)
    c = solve_at(spec, (0.0, 1.0), levels=18)
    n_top = 8

    def value(n, m, label):
        return invariant_report(c, n, m).scalars[label, label].value

    out = []
    for sign in (1, -1):
        seq = [value(n, n + sign, "T") for n in range(max(0, -sign), n_top + 1)]
        out.append(relation(f"N_T(n,n{sign:+d}) decreasing up to n=8", all(a > b for a, b in zip(seq, seq[1:]))))
        out.append(relation(f"N_T(8,8{sign:+d}) nearer 0 than 1/2", abs(seq[-1]) < abs(seq[-1] - 0.5)))
    for sign, a, label in product((1, -1), (1, 2, 3, 4), LABELS):
        if label == "T":
            continue
        # for even offsets M is symmetric, so G = M and both tend to 1/2
        limit = 0.5 if a in (2, 4) else 1.0
        other = 1.5 - limit
        v8, v4 = value(n_top, n_top + sign * a, label), value(4, 4 + sign * a, label)
        tag = f"N_{label}(n,n{sign * a:+d})"
        out.append(relation(f"{tag} at n=8 nearer {limit:g} than {other:g}", abs(v8 - limit) < abs(v8 - other)))
        out.append(relation(f"{tag} approaches {limit:g}", abs(v8 - limit) <= abs(v4 - limit)))
    return Criterion(14, "example-1 invariant families: trends and limits 1 and 1/2", out)


# ---------------------------------------------------------------------------
# example 2


def criterion_6(hbar=1.0):
    spec = builtin_family("example2", hbar)
    out = []
    for lam in EX2_POINTS:
        c = solve_at(spec, lam, levels=12)
        g_err = d_err = f_err = r_err = 0.0
        for n in range(5):
            o = oracle_example2(n, None, lam)
            q = qgt(c, None, n)
            g_err = max(g_err, compare(q.g, o["g"]).error)
            d_err = max(d_err, compare(np.linalg.det(q.g), o["det_g"]).error)
            f_err = max(f_err, compare(q.F, o["F"]).error)
            for m in (n - 2, n - 1, n + 1, n + 2):
                if m >= 0:
                    r = r_curvature(spec, lam, n, m, center=c)
                    r_err = max(r_err, compare(r, oracle_example2(n, m, lam)["R"]).error)
        out += [
            check(f"ex2 g n<=4 at {lam}", g_err, 1e-6),
            check(f"ex2 det g n<=4 at {lam}", d_err, 1e-6),
            check(f"ex2 F n<=4 at {lam}", f_err, 1e-6),
            check(f"ex2 R (finite differences) n<=4 at {lam}", r_err, 1e-6),
        ]
    return Criterion(6, "example-2 gauge invariants g, det g, F, R", out)


def criterion_7(hbar=1.0):
    spec = builtin_family("example2", hbar)
    out = []
    for lam in EX2_POINTS:
        c = solve_at(spec, lam, levels=14)
        e = nbein_tensor(c)
        e_err = efd_err = g_err = t_err = 0.0
        for n in range(5):
            for m in range(max(0, n - 6), n + 7):
                if m == n:
                    continue
                o = oracle_example2(n, m, lam)
                ts = two_state(c, None, n, m)
                e_err = max(e_err, compare(e[n, m], o["e"], "modulus").error)
                g_err = max(g_err, compare(ts.G, o["G"], "modulus").error)
                t_err = max(t_err, compare(ts.T, o["T"], "modulus").error)
                if abs(m - n) <= 2:
                    efd = nbein_fd(spec, lam, n, m, center=c).components
                    efd_err = max(efd_err, compare(efd, o["e"], "modulus").error)
        out += [
            check(f"ex2 |e| spectral n<=4 at {lam}", e_err, 1e-6),
            check(f"ex2 |e| finite differences n<=4 at {lam}", efd_err, 1e-6),
            check(f"ex2 |G| n<=4 at {lam}", g_err, 1e-6),
            check(f"ex2 |T| (zero unless m=n+-1) n<=4 at {lam}", t_err, 1e-6),
        ]
        # in the coordinate-wavefunction gauge the connections themselves match
        d = solve_at(spec, lam, levels=12, gauge=dressed_gauge(spec))
        a_err = max(compare(berry_connection_fd(spec, lam, n, center=d), oracle_example2(n, None, lam)["A"]).error for n in range(5))
        gam_err = max(
            compare(gamma_connection(spec, lam, n, m, center=d, curvature=False).Gamma, oracle_example2(n, m, lam)["Gamma"]).error
            for n in range(5)
            for m in range(5)
            if m != n
        )
        out += [check(f"ex2 A (dressed gauge) n<=4 at {lam}", a_err, 1e-6), check(f"ex2 Gamma (dressed gauge) at {lam}", gam_err, 1e-6)]
    return Criterion(7, "example-2 gauge-dependent moduli", out)


def criterion_13(hbar=1.0):
    s2 = builtin_family("example2", hbar)
    d_r, d_t = bianchi_residuals(s2, (1.0, 0.3, 1.0), 0, 1)
    s1 = builtin_family("example1", hbar)
    e_r, e_t = bianchi_residuals(s1, (1.0, 1.0), 0, 1)
    return Criterion(
        13,
        "Bianchi identities",
        [
            check("ex2 cyclic dR residual", d_r, 1e-6),
            check("ex2 dT + i Gamma^T - i R^e residual", d_t, 1e-4),
            check("ex1 residuals vanish identically", max(e_r, e_t), 0.0),
        ],
    )


# ---------------------------------------------------------------------------
# properties (no oracles)

PROPERTY_CASES = [("example1", (1.0, 1.0)), ("example1", (0.4, 0.7)), ("example2", (1.0, 0.3, 1.0)), ("example2", (0.5, -0.4, 1.5))]


def criterion_8(hbar=1.0):
    out = []
    for name, lam in PROPERTY_CASES:
        spec = builtin_family(name, hbar)
        c = solve_at(spec, lam, levels=10)
        err = 0.0
        for n in range(3):
            for m in range(4):
                if m == n:
                    continue
                ref = torsion(spec, lam, n, m, "hamiltonian", center=c)
                for route in TORSION_ROUTES:
                    err = max(err, np.abs(torsion(spec, lam, n, m, route, center=c) - ref).max())
        out.append(check(f"{name} torsion routes at {lam}", err, 1e-6))
    return Criterion(8, "torsion: covariant FD = N-bein sum = Hamiltonian form", out)


def criterion_9(hbar=1.0):
    out = []
    for name, lam in PROPERTY_CASES:
        spec = builtin_family(name, hbar)
        c = solve_at(spec, lam, levels=12)
        err = 0.0
        for n in range(5):
            qs = [qgt(c, None, n, meth).Q for meth in ("projector", "nbein-sum", "zanardi")]
            err = max(err, np.abs(qs[0] - qs[1]).max(), np.abs(qs[0] - qs[2]).max())
        out.append(check(f"{name} QGT routes at {lam}", err, 1e-9))
    return Criterion(9, "QGT: projector = N-bein sum = Zanardi", out)


def random_phases(spec, levels, seed):
    """Smooth polynomial phases ``alpha_n(lam)`` with random coefficients."""
    rng = np.random.default_rng(seed)
    names = spec.parameter_names
    out = []
    for _ in range(levels):
        c = rng.uniform(-1.0, 1.0, size=len(names) + 1)
        terms = [f"({c[i]:.6f})*{p}" for i, p in enumerate(names)]
        terms.append(f"({c[-1]:.6f})*{names[0]}*{names[-1]}^2")
        out.append(" + ".join(terms))
    return out


def criterion_10(hbar=1.0):
    out = []
    for k, (name, lam) in enumerate(PROPERTY_CASES):
        spec = builtin_family(name, hbar)
        c = solve_at(spec, lam, levels=10)
        phases = random_phases(spec, c.levels, seed=17 + k)
        p = apply_gauge(c, phases)
        env = spec.env(c.lam)
        alpha = np.array([parse_coeff(s, spec.parameter_names).evaluate(env) for s in phases])
        dalpha = np.array(
            [[differentiate_coeff(parse_coeff(s, spec.parameter_names), x).evaluate(env) for x in spec.parameter_names] for s in phases]
        )
        inv_err = cov_err = shift_err = 0.0
        for n in range(3):
            inv_err = max(inv_err, np.abs(qgt(c, None, n).Q - qgt(p, None, n).Q).max())
            a0 = berry_connection_fd(spec, lam, n, center=c)
            a1 = berry_connection_fd(spec, lam, n, center=p)
            shift_err = max(shift_err, np.abs(a1 - (a0 - dalpha[n])).max())
            for m in range(3):
                if m == n:
                    continue
                ph = np.exp(1j * (alpha[n] - alpha[m]))
                t0, t1 = two_state(c, None, n, m), two_state(p, None, n, m)
                for x0, x1 in [(t0.M, t1.M), (t0.G, t1.G), (t0.T, t1.T)]:
                    cov_err = max(cov_err, np.abs(x1 - ph * x0).max())
                cov_err = max(cov_err, np.abs(nbein_tensor(p)[n, m] - ph * nbein_tensor(c)[n, m]).max())
                cov_err = max(
                    cov_err,
                    np.abs(nbein_fd(spec, lam, n, m, center=p).components - ph * nbein_fd(spec, lam, n, m, center=c).components).max(),
                )
                g0 = gamma_connection(spec, lam, n, m, center=c)
                g1 = gamma_connection(spec, lam, n, m, center=p)
                shift_err = max(shift_err, np.abs(g1.Gamma - (g0.Gamma - (dalpha[n] - dalpha[m]))).max())
                inv_err = max(inv_err, np.abs(g1.R - g0.R).max())
                r0, r1 = invariant_report(c, n, m), invariant_report(p, n, m)
                for key in r0.tensors:
                    inv_err = max(inv_err, np.abs(r0.tensors[key].values - r1.tensors[key].values).max())
                for key in r0.scalars:
                    inv_err = max(inv_err, abs(r0.scalars[key].value - r1.scalars[key].value))
        out += [
            check(f"{name} invariants g,F,R,N,A under phases at {lam}", inv_err, 1e-8),
            check(f"{name} e,M,G,T pick up exp(i alpha_nm) at {lam}", cov_err, 1e-6),
            check(f"{name} A, Gamma shift by -d alpha at {lam}", shift_err, 1e-6),
        ]
    return Criterion(10, "gauge transformation laws", out)


def criterion_11(hbar=1.0):
    out = []
    for name, lam in PROPERTY_CASES:
        spec = builtin_family(name, hbar)
        c = solve_at(spec, lam, levels=10)
        e = nbein_tensor(c)
        errs = dict.fromkeys(("e", "theta", "eta", "T", "M", "G"), 0.0)
        for n, m in product(range(c.levels), repeat=2):
            if n == m:
                continue
            te_nm, te_mn = theta_eta_split(e[n, m]), theta_eta_split(e[m, n])
            errs["e"] = max(errs["e"], np.abs(e[n, m].conj() - e[m, n]).max())
            errs["theta"] = max(errs["theta"], np.abs(te_nm.theta - te_mn.theta).max())
            errs["eta"] = max(errs["eta"], np.abs(te_nm.eta + te_mn.eta).max())
            a, b = two_state(c, None, n, m), two_state(c, None, m, n)
            errs["T"] = max(errs["T"], np.abs(a.T.conj() - b.T).max())
            errs["M"] = max(errs["M"], np.abs(a.M.conj() - b.M.T).max())
            errs["G"] = max(errs["G"], np.abs(a.G.conj() - b.G).max())
        out += [check(f"{name} conjugation of {k} at {lam}", v, 1e-10) for k, v in errs.items()]
    return Criterion(11, "conjugation identities", out)


def criterion_12(hbar=1.0):
    out = []
    cases = [("example2", (1.0, 0.3, 1.0), (0.3, -0.5, 0.4), 0, 1), ("example1", (1.0, 1.0), (0.6, -0.8), 0, 1)]
    for name, lam, direction, n, m in cases:
        spec = builtin_family(name, hbar)
        c = solve_at(spec, lam, levels=10)
        d = 1e-3 * np.asarray(direction)
        r1 = first_order_overlap_check(spec, lam, d, n, m, center=c)[2]
        r2 = first_order_overlap_check(spec, lam, d / 2, n, m, center=c)[2]
        ratio = r1 / r2
        # the halving ratio must lie in [3.5, 4.5]; reported as distance from 4
        out.append(check(f"{name} |halving ratio - 4| for ({n},{m}), ratio={ratio:.4f}", abs(ratio - 4), 0.5))
    return Criterion(12, "first-order overlap residual is O(|delta|^2)", out)


CRITERIA = {
    1: criterion_1,
    2: criterion_2,
    3: criterion_3,
    4: criterion_4,
    5: criterion_5,
    6: criterion_6,
    7: criterion_7,
    8: criterion_8,
    9: criterion_9,
    10: criterion_10,
    11: criterion_11,
    12: criterion_12,
    13: criterion_13,
    14: criterion_14,
}

SUITES = {
    "example1": (1, 2, 3, 4, 5, 14),
    "example2": (6, 7, 13),
    "properties": (8, 9, 10, 11, 12),
}
SUITES["all"] = tuple(sorted(set().union(*SUITES.values())))


def run_suite(name="all", hbar=1.0):
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
    return [CRITERIA[k](hbar) for k in SUITES[name]]
