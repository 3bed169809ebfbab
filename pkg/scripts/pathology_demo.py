"""Show where lenient and strict hit counting disagree.

Three toy cases at a 20 ms tolerance:
  worked   a small hand-built example with one double hit
  triple   three predictions around one reference boundary
  flat     a model that fires on every frame of a 50 Hz grid
"""

import argparse

from phoneseg.core import FrameProbabilitySequence, Segmentation, Timebase
from phoneseg.extract import PeakConfig, peaks_to_segmentation
from phoneseg.metrics import MatchConfig, evaluate_corpus
from phoneseg.report import render_table


def score(ref, hyp, trim):
    return {
        s: evaluate_corpus([(ref, hyp)], MatchConfig(scheme=s, trim_edges=trim)).overall
        for s in ("lenient", "strict")
    }


def cases(n_frames, step):
    stride = 0.02
    yield "worked", (
        Segmentation("w", (0.0, 0.1, 0.2, 0.23, 0.4, 0.6), 0.6),
        Segmentation("w", (0.0, 0.1, 0.215, 0.385, 0.41, 0.6), 0.6),
        True,
    )
    yield "triple", (
        Segmentation("t", (10 * stride,)),
        Segmentation("t", (9 * stride, 10 * stride, 11 * stride)),
        False,
    )
    tb = Timebase(16000, stride)
    ref = Segmentation("f", tuple(k * stride for k in range(0, n_frames, step)), n_frames * stride)
    flat = FrameProbabilitySequence((1.0,) * n_frames)
    hyp = peaks_to_segmentation("f", flat, tb, PeakConfig(threshold=0.5, min_distance_frames=1))
    yield "flat", (ref, hyp, False)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--frames", type=int, default=58, help="frames in the flat case")
    ap.add_argument("--step", type=int, default=3, help="frames between reference boundaries")
    args = ap.parse_args(argv)

    rows = {name: score(*c) for name, c in cases(args.frames, args.step)}
    print(render_table(rows), end="")


if __name__ == "__main__":
    main()
