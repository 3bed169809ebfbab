"""Tolerance sweep on a seeded synthetic corpus, written as CSV.

Reference boundaries are sampled with a minimum gap; hypotheses are the same
boundaries with jitter, deletions and insertions applied.
"""

import argparse
import sys

from phoneseg.metrics import MatchConfig, evaluate_corpus
from phoneseg.report import render_csv
from phoneseg.synthgen import PerturbConfig, gen_corpus, perturb_corpus


def sweep(pairs, tolerances, trim):
    rows = []
    for tol in tolerances:
        reps = {
            s: evaluate_corpus(pairs, MatchConfig(tolerance_sec=tol, scheme=s, trim_edges=trim)).overall
            for s in ("lenient", "strict")
        }
        rows.append((tol, reps))
    return rows


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n-utts", type=int, default=200)
    ap.add_argument("--n-boundaries", type=int, default=30)
    ap.add_argument("--min-gap", type=float, default=0.04)
    ap.add_argument("--duration", type=float, default=3.0)
    ap.add_argument("--jitter-std", type=float, default=0.01)
    ap.add_argument("--p-delete", type=float, default=0.1)
    ap.add_argument("--p-insert", type=float, default=0.1)
    ap.add_argument("--tolerances", default="0.005,0.01,0.02,0.03,0.04,0.05")
    ap.add_argument("--no-trim-edges", dest="trim", action="store_false")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="-")
    args = ap.parse_args(argv)

    refs = gen_corpus(args.n_utts, args.n_boundaries, args.min_gap, args.duration, seed=args.seed)
    hyps = perturb_corpus(refs, PerturbConfig(args.jitter_std, args.p_delete, args.p_insert,
                                              seed=args.seed + 1))
    tols = [float(t) for t in args.tolerances.split(",")]
    text = render_csv(sweep(list(zip(refs, hyps)), tols, args.trim))
    if args.out == "-":
        sys.stdout.write(text)
    else:
        with open(args.out, "w") as f:
            f.write(text)


if __name__ == "__main__":
    main()
