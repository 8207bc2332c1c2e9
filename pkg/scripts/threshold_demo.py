"""Eventual-ultracontractivity trichotomy on three kernels truncated at |z| = 1.

For each kernel prints the limit trend of ell at the origin, the verdict, and
how the fitted decay exponent of exp(-t m(xi)) scales with t.
"""

from levylab.hyperlab import classify_kernel_threshold
from levylab.operators import radial_kernel

KERNELS = [
    ("ell = r^-1/2", radial_kernel("power_truncated", 1, alpha=0.5)),
    ("ell = 1", radial_kernel("truncated", 1)),
    ("ell = 1/log(e + 1/r)", radial_kernel("inv_log_truncated", 1)),
]


def main():
    for label, kernel in KERNELS:
        v = classify_kernel_threshold(kernel)
        exps = ", ".join(f"t={t:g}: {s:.3f}" for t, s in v.decay_exponents.items())
        print(f"{label:24s} trend={v.trend:9s} verdict={v.verdict}")
        print(f"{'':24s} decay exponents {exps}; slope growth {v.decay_exponent_growth:.3f}")


if __name__ == "__main__":
    main()
