"""Hypercontractivity of log(I - Laplacian) on a Gaussian bump, for several p.

Prints |u(t)|_{q(t)} / (A_p(t) |u0|_p) on the admissible time window of each p.
"""

import argparse

import numpy as np

from levylab.hyperlab import run_hyper_experiment
from levylab.operators import builtin_symbol
from levylab.spectral import TorusGrid


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--p", type=float, nargs="+", default=[2.0, 3.0, 4.0])
    ap.add_argument("--n", type=int, default=4096)
    ap.add_argument("--L", type=float, default=40.0)
    ap.add_argument("--points", type=int, default=6)
    args = ap.parse_args()

    grid = TorusGrid(1, args.L, args.n)
    u0 = grid.sample(lambda x: np.exp(-0.5 * x**2))
    u0 = u0.with_values(u0.values / u0.norm(2))
    sym = builtin_symbol("log_bessel")
    for p in args.p:
        t_inf = 1.0 / (2.0 * p)
        times = np.linspace(0.0, 0.8 * t_inf, args.points)
        trace = run_hyper_experiment(sym, u0, p, times)
        print(f"p = {p:g}  (exponent blows up at t = {t_inf:.4g})")
        print("      t          q      ratio")
        for r in trace.records:
            print(f"{r.t:8.4f} {r.q:10.4f} {r.ratio:10.6f}")


if __name__ == "__main__":
    main()
