"""Score one or more prediction files against a reference set.

    python scripts/reproduce_table.py --ref timit_test.jsonl unsup=unsup.jsonl sup=sup.jsonl

Every file is canonical segmentation JSONL. Prints one table row per label with
both hit-counting schemes, at the default 20 ms tolerance with edge trimming.
"""

import argparse
import sys

from phoneseg.core import InputError, read_segmentations
from phoneseg.metrics import MatchConfig, evaluate_corpus, pair_by_id
from phoneseg.report import render_table


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--ref", required=True)
    ap.add_argument("predictions", nargs="+", metavar="LABEL=PATH")
    ap.add_argument("--tolerance", type=float, default=0.02)
    ap.add_argument("--aggregation", choices=["micro", "macro"], default="micro")
    args = ap.parse_args(argv)

    with open(args.ref) as f:
        refs = read_segmentations(f)
    rows = {}
    for item in args.predictions:
        label, sep, path = item.partition("=")
        if not sep:
            ap.error(f"expected LABEL=PATH, got {item!r}")
        with open(path) as f:
            pairs = pair_by_id(refs, read_segmentations(f))
        rows[label] = {
            s: evaluate_corpus(pairs, MatchConfig(args.tolerance, s, aggregation=args.aggregation)).overall
            for s in ("lenient", "strict")
        }
    print(render_table(rows), end="")


if __name__ == "__main__":
    try:
        main()
    except InputError as e:
        sys.exit(f"error: {e}")
