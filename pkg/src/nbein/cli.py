"""Command-line front end: ``eval``, ``sweep``, ``verify`` and ``riemann``.

Exit codes: 0 success, 1 verification failure, 2 usage/config error,
3 domain or numerical error.
"""

import argparse
import csv
import io
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields, replace
from itertools import product

import numpy as np

from .errors import ConfigError, DSLSyntaxError, NbeinError, SymArityError, UnknownSymbol, UnsupportedDescriptor
from .geometry import berry_connection_fd, gamma_connection, nbein_tensor, qgt, two_state
from .hamdsl import BUILTIN_FAMILIES, builtin_family, parse_coeff, parse_family
from .invariants import LABELS, invariant_report
from .riemann import scalar_curvature
from .spectrum import GaugePolicy, converge_truncation, default_levels, dressed_gauge, solve_at
from .verify import SUITES, run_suite

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3
GAUGES = ("largest-real-positive", "dressed-real")
FORMATS = ("json", "csv")
CONFIG_ERRORS = (ConfigError, DSLSyntaxError, UnknownSymbol, SymArityError, UnsupportedDescriptor)


@dataclass(frozen=True)
class RunConfig:
    family: str = "example1"
    params: tuple = None  # required when ``family`` is DSL text
    hbar: float = 1.0
    constraints: tuple = ()  # coefficient expressions that must stay > 0
    trunc: object = None  # int, "auto" or None for the default 4*levels + 40
    trunc_tol: float = 1e-10
    levels: int = None
    gauge: str = "largest-real-positive"
    fd_step: float = None
    format: str = "json"
    out: str = None
    backend: str = "lapack"

    def validate(self):
        if not isinstance(self.family, str) or not self.family.strip():
            raise ConfigError("family must be a built-in name or family text")
        if self.family not in BUILTIN_FAMILIES and not self.params:
            raise ConfigError("a custom family needs its parameter names (--params)")
        if not _is_number(self.hbar) or self.hbar <= 0:
            raise ConfigError(f"hbar must be a positive number, got {self.hbar!r}")
        if self.trunc not in (None, "auto") and not (isinstance(self.trunc, int) and self.trunc > 4):
            raise ConfigError(f"trunc must be an integer > 4 or 'auto', got {self.trunc!r}")
        if not _is_number(self.trunc_tol):
            raise ConfigError(f"trunc_tol must be a number, got {self.trunc_tol!r}")
        if self.levels is not None and not (isinstance(self.levels, int) and self.levels >= 1):
            raise ConfigError(f"levels must be a positive integer, got {self.levels!r}")
        if self.gauge not in GAUGES:
            raise ConfigError(f"gauge must be one of {GAUGES}, got {self.gauge!r}")
        if self.fd_step is not None and not (_is_number(self.fd_step) and self.fd_step > 0):
            raise ConfigError(f"fd_step must be a positive number, got {self.fd_step!r}")
        if self.format not in FORMATS:
            raise ConfigError(f"format must be one of {FORMATS}, got {self.format!r}")
        if self.backend not in ("lapack", "native"):
            raise ConfigError(f"backend must be 'lapack' or 'native', got {self.backend!r}")
        return self

    def family_spec(self):
        if self.family in BUILTIN_FAMILIES:
            spec = builtin_family(self.family, self.hbar)
            if self.constraints:
                extra = tuple(parse_coeff(c, spec.parameter_names) for c in self.constraints)
                spec = replace(spec, constraints=spec.constraints + extra)
            return spec
        return parse_family(self.family, tuple(self.params), hbar=self.hbar, constraints=tuple(self.constraints))

    def gauge_policy(self, spec):
        if self.gauge == "dressed-real":
            g = dressed_gauge(spec)
            if g.kind != "dressed-real":
                raise ConfigError(f"family {spec.name!r} declares no dressing; use the default gauge")
            return g
        return GaugePolicy()


def _is_number(x):
    return isinstance(x, (int, float)) and not isinstance(x, bool) and np.isfinite(x)


def load_config(path):
    """Strict JSON object whose keys are :class:`RunConfig` fields."""
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh, parse_constant=_reject_constant)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except ValueError as exc:
        raise ConfigError(f"config {path} is not strict JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    known = {f.name for f in fields(RunConfig)}
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    for key in ("params", "constraints"):
        if key in raw:
            if not isinstance(raw[key], list) or not all(isinstance(s, str) for s in raw[key]):
                raise ConfigError(f"{key} must be a list of strings")
            raw[key] = tuple(raw[key])
    return raw


def _reject_constant(name):
    raise ValueError(f"non-finite constant {name}")


FLAG_KEYS = {
    "family": "family",
    "params": "params",
    "hbar": "hbar",
    "trunc": "trunc",
    "levels": "levels",
    "gauge": "gauge",
    "fd_step": "fd_step",
    "format": "format",
    "out": "out",
    "backend": "backend",
}


def build_config(args):
    values = load_config(args.config) if getattr(args, "config", None) else {}
    for attr, key in FLAG_KEYS.items():
        v = getattr(args, attr, None)
        if v is not None:
            values[key] = v
    return RunConfig(**values).validate()


# ---------------------------------------------------------------------------
# argument parsing helpers


def parse_params(text):
    names = tuple(s.strip() for s in text.split(",") if s.strip())
    if not names:
        raise argparse.ArgumentTypeError("expected comma-separated parameter names")
    return names


def parse_trunc(text):
    if text == "auto":
        return text
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"trunc must be an integer or 'auto', got {text!r}") from None


def parse_lambda(text):
    """``W=0,Z=1`` -> {"W": 0.0, "Z": 1.0}."""
    out = {}
    for item in text.split(","):
        if not item.strip():
            continue
        name, sep, value = item.partition("=")
        if not sep:
            raise argparse.ArgumentTypeError(f"expected name=value, got {item!r}")
        try:
            out[name.strip()] = float(value)
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad value in {item!r}") from None
    return out


def parse_m(text):
    """Absolute level ``3`` or offset ``+1``/``-2`` relative to ``n``."""
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"m must be an integer or a signed offset, got {text!r}") from None
    return (v, text.strip()[0] in "+-")


def parse_axis(text):
    """``W=0:1:5`` -> ("W", [0, 0.25, ..., 1]); ``n=0:8`` -> integer levels."""
    name, sep, rng = text.partition("=")
    parts = rng.split(":")
    if not sep or len(parts) not in (2, 3):
        raise argparse.ArgumentTypeError(f"axis must look like name=min:max[:steps], got {text!r}")
    name = name.strip()
    try:
        if name == "n":
            lo, hi = int(parts[0]), int(parts[1])
            if len(parts) == 3 or lo < 0 or hi < lo:
                raise ValueError
            return name, list(range(lo, hi + 1))
        lo, hi = float(parts[0]), float(parts[1])
        steps = int(parts[2]) if len(parts) == 3 else 2
        if steps < 1 or (steps == 1 and lo != hi):
            raise ValueError
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad axis range {text!r}") from None
    return name, [float(x) for x in np.linspace(lo, hi, steps)]


def resolve_m(n, m):
    if m is None:
        return None
    value, relative = m
    m = n + value if relative else value
    if m == n:
        raise ConfigError("m must differ from n")
    if m < 0:
        raise ConfigError(f"m resolves to a negative level ({m})")
    return m


# ---------------------------------------------------------------------------
# serialisation


def jsonable(x):
    """Nested lists; every complex number becomes ``[re, im]``."""
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    a = np.asarray(x)
    if np.iscomplexobj(a):
        return np.stack([a.real, a.imag], axis=-1).tolist()
    if a.dtype == bool:
        return a.tolist()
    if np.issubdtype(a.dtype, np.integer):
        return a.tolist()
    if np.issubdtype(a.dtype, np.floating):
        return a.astype(float).tolist()
    return x


def dump_json(obj):
    try:
        return json.dumps(jsonable(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"
    except ValueError:
        raise FloatingPointError("refusing to emit NaN or Inf") from None


def write_output(text, path):
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# computation


def _trunc_dim(cfg, spec, lam, levels):
    if cfg.trunc == "auto":
        return converge_truncation(spec, lam, levels, cfg.trunc_tol, backend=cfg.backend)
    return cfg.trunc


def _solve(cfg, spec, lam, top):
    levels = cfg.levels if cfg.levels is not None else default_levels(top)
    if top >= levels:
        raise ConfigError(f"level {top} is not retained (levels={levels})")
    return solve_at(spec, lam, _trunc_dim(cfg, spec, lam, levels), levels, cfg.gauge_policy(spec), backend=cfg.backend)


def evaluate(cfg, lam, n, m=None):
    """Every tensor at ``lam`` for level ``n`` (and pair ``(n, m)``)."""
    spec = cfg.family_spec()
    lam = spec.point(lam)
    spec.check_domain(lam)
    b = _solve(cfg, spec, lam, max(n, m or 0))
    e = nbein_tensor(b)
    q = qgt(b, None, n)
    out = {
        "family": spec.unparse(),
        "parameters": list(spec.parameter_names),
        "lambda": list(lam),
        "hbar": spec.hbar,
        "n": n,
        "levels": b.levels,
        "trunc_dim": b.trunc_dim,
        "gauge": b.gauge,
        "energies": b.energies,
        "nbein": {str(k): e[n, k] for k in range(b.levels) if k != n},
        "A": berry_connection_fd(spec, lam, n, cfg.fd_step, center=b),
        "Q": q.Q,
        "g": q.g,
        "F": q.F,
        "det_g": float(np.linalg.det(q.g)),
    }
    if m is not None:
        rep = invariant_report(b, n, m)
        conn = gamma_connection(spec, lam, n, m, cfg.fd_step, center=b)
        parts = {}
        for label in LABELS:
            parts[f"N_{label}"] = rep.tensors["N", label, label].values
            parts[f"A_{label}"] = rep.tensors["A", label, label].values
        parts["scalars"] = {f"{a}{c}": s.value for (a, c), s in rep.scalars.items()}
        pair = two_state(b, None, n, m)
        out.update(m=m, M=pair.M, G=pair.G, T=pair.T, Gamma=conn.Gamma, R=conn.R, invariants=parts)
    return out


def sweep_header(axes, m, curvature):
    cols = [name for name, _ in axes]
    if "n" not in cols:
        cols.append("n")
    cols.append("m")
    cols.append("det_g")
    if curvature:
        cols += ["R", "R_err"]
    if m is not None:
        cols += [f"N_{label}" for label in LABELS]
    return cols


def sweep_row(task):
    cfg, base, names, values, n, m, curvature = task
    point = dict(base)
    for k, v in zip(names, values):
        if k == "n":
            n = int(v)
        else:
            point[k] = v
    spec = cfg.family_spec()
    lam = spec.point(point)
    spec.check_domain(lam)
    mm = resolve_m(n, m)
    b = _solve(cfg, spec, lam, max(n, mm or 0))
    row = list(values)
    if "n" not in names:
        row.append(n)
    row.append("" if mm is None else mm)
    row.append(float(np.linalg.det(qgt(b, None, n).g)))
    if curvature:
        r = scalar_curvature(spec, lam, cfg.fd_step, n, levels=b.levels, trunc_dim=b.trunc_dim, backend=cfg.backend)
        row += [r.value, r.error]
    if mm is not None:
        rep = invariant_report(b, n, mm)
        row += [rep.scalars[label, label].value for label in LABELS]
    return row


def _cell(v):
    if isinstance(v, float):
        if not np.isfinite(v):
            raise FloatingPointError("refusing to emit NaN or Inf")
        return repr(v)
    return str(v)


def sweep(cfg, axes, base, n, m=None, curvature=False, jobs=1):
    names = [name for name, _ in axes]
    tasks = [(cfg, base, names, values, n, m, curvature) for values in product(*(v for _, v in axes))]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(sweep_row, tasks))
    else:
        rows = [sweep_row(t) for t in tasks]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(sweep_header(axes, m, curvature))
    for row in rows:
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# subcommands


def _point(cfg, args, required=True):
    spec = cfg.family_spec()
    lam = args.lam or {}
    if required:
        try:
            spec.point(lam)
        except ValueError as exc:
            raise ConfigError(f"--lambda: {exc}") from None
    else:
        unknown = sorted(set(lam) - set(spec.parameter_names))
        if unknown:
            raise ConfigError(f"--lambda: unknown parameters {unknown}")
    return lam


def cmd_eval(args):
    cfg = build_config(args)
    lam = _point(cfg, args)
    m = resolve_m(args.n, args.m)
    if cfg.format != "json":
        raise ConfigError("eval emits JSON only; use sweep for CSV")
    write_output(dump_json(evaluate(cfg, lam, args.n, m)), cfg.out)
    return EXIT_OK


def cmd_sweep(args):
    cfg = build_config(args)
    spec = cfg.family_spec()
    axes = args.axis or []
    if not 1 <= len(axes) <= 2:
        raise ConfigError("sweep needs one or two --axis specs")
    names = [a for a, _ in axes]
    if len(set(names)) != len(names):
        raise ConfigError("duplicate sweep axis")
    for a in names:
        if a != "n" and a not in spec.parameter_names:
            raise ConfigError(f"unknown sweep axis {a!r}")
    base = _point(cfg, args, required=False)
    missing = [p for p in spec.parameter_names if p not in base and p not in names]
    if missing:
        raise ConfigError(f"--lambda must fix the unswept parameters {missing}")
    if args.m is not None and not args.m[1] and "n" in names:
        raise ConfigError("sweeping n needs a relative --m such as +1")
    if cfg.format != "csv" and args.format is not None:
        raise ConfigError("sweep emits CSV only")
    if args.jobs < 1:
        raise ConfigError("--jobs must be at least 1")
    write_output(sweep(cfg, axes, base, args.n, args.m, args.curvature, args.jobs), cfg.out)
    return EXIT_OK


def cmd_verify(args):
    cfg = build_config(args)
    criteria = run_suite(args.suite, cfg.hbar)
    lines = []
    for c in criteria:
        lines += [ch.line() for ch in c.checks]
        lines.append(c.line())
    ok = all(c.passed for c in criteria)
    lines.append(f"suite {args.suite}: {'PASS' if ok else 'FAIL'} ({sum(c.passed for c in criteria)}/{len(criteria)} criteria)")
    write_output("\n".join(lines) + "\n", cfg.out)
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_riemann(args):
    cfg = build_config(args)
    lam = _point(cfg, args)
    spec = cfg.family_spec()
    lam = spec.point(lam)
    spec.check_domain(lam)
    levels = cfg.levels if cfg.levels is not None else default_levels(args.n)
    trunc = _trunc_dim(cfg, spec, lam, levels)
    r = scalar_curvature(spec, lam, cfg.fd_step, args.n, levels=levels, trunc_dim=trunc, backend=cfg.backend)
    if not (np.isfinite(r.value) and np.isfinite(r.error)):
        raise FloatingPointError("curvature estimate is not finite")
    if args.format == "json":  # plain text unless JSON is asked for on the command line
        text = dump_json({"lambda": list(lam), "n": args.n, "scalar_curvature": r.value, "error": r.error, "fine": r.fine, "coarse": r.coarse, "steps": r.steps})
    else:
        text = f"R = {r.value:.10g} +- {r.error:.3g}  (n={args.n}, lambda={list(lam)})\n"
    write_output(text, cfg.out)
    return EXIT_OK


# ---------------------------------------------------------------------------


def _common(p):
    p.add_argument("--config", help="strict JSON RunConfig file; flags override it")
    p.add_argument("--family", help=f"built-in name ({', '.join(BUILTIN_FAMILIES)}) or family text")
    p.add_argument("--params", type=parse_params, help="parameter names of a custom family, e.g. W,Z")
    p.add_argument("--hbar", type=float)
    p.add_argument("--trunc", type=parse_trunc, help="Fock truncation dimension or 'auto'")
    p.add_argument("--levels", type=int, help="number of retained eigenstates")
    p.add_argument("--gauge", choices=GAUGES)
    p.add_argument("--fd-step", dest="fd_step", type=float, help="absolute finite-difference step")
    p.add_argument("--backend", choices=("lapack", "native"))
    p.add_argument("--format", choices=FORMATS)
    p.add_argument("--out", help="write output here instead of stdout")


def _point_args(p, m=True):
    p.add_argument("--lambda", dest="lam", type=parse_lambda, help="parameter point, e.g. W=0,Z=1")
    p.add_argument("--n", type=int, default=0)
    if m:
        p.add_argument("--m", type=parse_m, help="second level, absolute or offset like +1")


def make_parser():
    ap = argparse.ArgumentParser(prog="nbein", description="N-bein geometry of parametrised quantum systems")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="all tensors at one parameter point")
    _common(p)
    _point_args(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sweep", help="det g, curvature and invariants over a grid (CSV)")
    _common(p)
    _point_args(p)
    p.add_argument("--axis", action="append", type=parse_axis, help="name=min:max:steps (or n=lo:hi); repeat for 2D")
    p.add_argument("--curvature", action="store_true", help="add the scalar curvature column")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="run the acceptance suites")
    _common(p)
    p.add_argument("--suite", choices=sorted(SUITES), default="all")
    p.add_argument("--jobs", type=int, default=1, help="accepted for symmetry; checks run serially")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("riemann", help="scalar curvature of the quantum metric")
    _common(p)
    _point_args(p, m=False)
    p.set_defaults(func=cmd_riemann)
    return ap


def main(argv=None):
    ap = make_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        return args.func(args)
    except CONFIG_ERRORS as exc:
        print(f"nbein: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NbeinError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"nbein: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, TypeError) as exc:
        print(f"nbein: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
