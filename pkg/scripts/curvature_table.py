"""Finite-difference scalar curvature of the level-n quantum metric of the
shifted oscillator, next to -4/(n^2 + n + 1), at a few parameter points."""

import argparse

from nbein import builtin_family, scalar_curvature


def main():
    ap = argparse.ArgumentParser(description="scalar curvature table")
    ap.add_argument("--n-max", type=int, default=6)
    ap.add_argument("--hbar", type=float, default=1.0)
    ap.add_argument("--step", type=float, default=None, help="absolute stencil step")
    args = ap.parse_args()

    spec = builtin_family("example1", args.hbar)
    centres = [(0.0, 0.5), (1.0, 1.0), (0.3, 2.0)]
    print(f"{'n':>3} {'exact':>12} " + " ".join(f"{str(c):>22}" for c in centres))
    for n in range(args.n_max + 1):
        exact = -4 / (n * n + n + 1)
        cells = []
        for c in centres:
            r = scalar_curvature(spec, c, args.step, n)
            cells.append(f"{r.value:>12.8f} ±{r.error:8.1e}")
        print(f"{n:>3} {exact:>12.8f} " + " ".join(cells))


if __name__ == "__main__":
    main()
