"""Weak-L^{N/(N-2t)} norm of the Bessel heat kernel: estimate from samples vs closed form."""

from levylab.fundamental import bessel_profile, default_radii, weak_norm_estimate, weak_norm_exact


def main():
    print(" N     t    rmin        exact     estimate    rel.gap")
    for N, t in [(1, 0.25), (2, 0.2), (2, 0.5), (2, 0.8), (3, 1.0)]:
        p = N / (N - 2 * t)
        exact = weak_norm_exact(N, t)
        for rmin in (1e-3, 1e-5):
            est = weak_norm_estimate(bessel_profile(N, t, default_radii(rmin, 50.0, 512)), p)
            print(f"{N:2d} {t:5.2f} {rmin:7.0e} {exact:12.8f} {est:12.8f} {est / exact - 1:+10.2e}")


if __name__ == "__main__":
    main()
