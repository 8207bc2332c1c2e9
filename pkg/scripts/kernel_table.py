"""Kernel of log(I - Laplacian) against its two asymptotic regimes, N = 1, 2, 3."""

import math

import numpy as np

from levylab.operators import kernel_log
from levylab.special import gamma


def main():
    radii = np.geomspace(1e-4, 30.0, 12)
    for N in (1, 2, 3):
        small = gamma(N / 2) / math.pi ** (N / 2)
        large = (2 * math.pi) ** (-(N - 1) / 2)
        print(f"N = {N}: r^N J -> {small:.6f} as r -> 0, r^((N+1)/2) e^r J -> {large:.6f} as r -> inf")
        print("         r        r^N J   r^((N+1)/2) e^r J")
        for r in radii:
            J = kernel_log(r, N)
            print(f"{r:10.3e} {r**N * J:12.6f} {r ** ((N + 1) / 2) * math.exp(r) * J:14.6f}")
        print()


if __name__ == "__main__":
    main()
