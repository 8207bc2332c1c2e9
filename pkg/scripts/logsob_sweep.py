"""p-log-Sobolev residuals of log(I - Laplacian) over the default corpus.

Writes one CSV row per (field, p) and reports the largest residual relative
to |f|_p^p for each p.
"""

import argparse
import sys

import numpy as np

from levylab.corpus import default_corpus, default_grid
from levylab.functionals import FourierForm, plog_sobolev_terms, residual_csv_text
from levylab.hyperlab import log_bessel_family
from levylab.operators import builtin_symbol


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--dim", type=int, default=1, choices=(1, 2, 3))
    ap.add_argument("--p", type=float, nargs="+", default=[2.0, 3.0, 4.0, 6.0, 8.0])
    ap.add_argument("--out", default=None)
    args = ap.parse_args()

    fam = log_bessel_family(args.dim)
    form = FourierForm(builtin_symbol("log_bessel"))
    corpus = default_corpus(default_grid(args.dim))
    rows = []
    worst = {p: -np.inf for p in args.p}
    for entry in corpus:
        for p in args.p:
            terms = plog_sobolev_terms(entry.field, p, fam, form)
            rows.append((entry.field_id, p, terms))
            worst[p] = max(worst[p], terms.residual / entry.field.norm(p) ** p)
    text = residual_csv_text(rows, [f"dim={args.dim}", f"family={fam.name}"])
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    for p, w in worst.items():
        print(f"p={p:g}: max residual / |f|_p^p = {w:+.4f}", file=sys.stderr)


if __name__ == "__main__":
    main()
