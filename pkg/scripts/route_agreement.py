"""Cross-check the independent routes for the metric and the torsion on the
generalised oscillator: worst disagreement over levels and random points."""

import argparse

import numpy as np

from nbein import TORSION_ROUTES, builtin_family, qgt, solve_at, torsion


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--backend", choices=("lapack", "native"), default="lapack")
    args = ap.parse_args()

    spec = builtin_family("example2")
    rng = np.random.default_rng(args.seed)
    for _ in range(args.points):
        w, y = rng.uniform(-1, 1), rng.uniform(-0.5, 0.5)
        z = y * y + rng.uniform(0.4, 1.5)
        lam = (w, y, z)
        b = solve_at(spec, lam, levels=10, backend=args.backend)
        q_err = max(
            np.abs(qgt(b, None, n, meth).Q - qgt(b, None, n).Q).max() for n in range(4) for meth in ("projector", "zanardi")
        )
        t_err = 0.0
        for n, m in [(0, 1), (1, 2), (2, 1), (1, 3)]:
            ref = torsion(spec, lam, n, m, "hamiltonian", center=b)
            t_err = max(t_err, max(np.abs(torsion(spec, lam, n, m, r, center=b) - ref).max() for r in TORSION_ROUTES))
        print(f"lambda=({w:+.3f}, {y:+.3f}, {z:.3f})  QGT routes {q_err:.2e}  torsion routes {t_err:.2e}")


if __name__ == "__main__":
    main()
