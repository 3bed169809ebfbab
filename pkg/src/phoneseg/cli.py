"""Command line interface.

    phoneseg convert   TIMIT/Buckeye annotations -> segmentation JSONL
    phoneseg eval      score hypothesis against reference segmentations
    phoneseg peaks     frame probabilities -> segmentation JSONL
    phoneseg bootstrap segmentation JSONL -> frame-label JSONL
    phoneseg loss      weighted BCE of probabilities against frame labels
    phoneseg synth     synthetic reference / perturbed hypothesis corpora
    phoneseg report    render saved eval JSON files as one table
    phoneseg pipeline  peaks followed by eval

Exit codes: 0 success, 1 evaluation undefined (e.g. empty reference),
2 bad input (parse or pairing errors). Every path argument accepts ``-`` for
stdin/stdout. PHONESEG_TOLERANCE and PHONESEG_STRIDE override the default
tolerance and frame stride.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import logging
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import corpus, extract, metrics, objective, report, synthgen
from .core import (
    EvaluationError,
    FrameLabelSequence,
    FrameProbabilitySequence,
    InputError,
    Segmentation,
    Timebase,
    iter_jsonl,
    read_segmentations,
    write_segmentations,
)

log = logging.getLogger("phoneseg")


def _env_float(name: str, default: float) -> float:
    v = os.environ.get(name)
    if v is None:
        return default
    try:
        return float(v)
    except ValueError:
        raise SystemExit(f"phoneseg: {name}={v!r} is not a number")


@contextlib.contextmanager
def _open(path, mode="r"):
    if str(path) == "-":
        yield sys.stdout if "w" in mode else sys.stdin
    else:
        with open(path, mode, encoding="utf-8") as fp:
            yield fp


def _read_segs(path) -> list[Segmentation]:
    with _open(path) as fp:
        try:
            return read_segmentations(fp)
        except InputError as e:
            raise InputError(f"{path}: {e}") from e


# --- eval ------------------------------------------------------------------

@dataclass
class EvalRequest:
    ref_path: str
    hyp_path: str
    tolerance_sec: float = 0.02
    scheme: str = "both"  # strict | lenient | both
    strict_variant: str = "maximum"
    trim_edges: bool = True
    aggregation: str = "micro"
    output_format: str = "table"  # table | json | csv
    sweep: Sequence[float] = field(default_factory=tuple)

    def __post_init__(self):
        if not self.tolerance_sec >= 0:
            raise InputError(f"tolerance must be >= 0, got {self.tolerance_sec}")
        if self.scheme not in ("strict", "lenient", "both"):
            raise InputError(f"unknown scheme {self.scheme!r}")
        if self.output_format not in ("table", "json", "csv"):
            raise InputError(f"unknown output format {self.output_format!r}")

    @property
    def schemes(self) -> list[str]:
        return ["lenient", "strict"] if self.scheme == "both" else [self.scheme]

    def match_config(self, tolerance=None) -> metrics.MatchConfig:
        return metrics.MatchConfig(
            tolerance_sec=self.tolerance_sec if tolerance is None else tolerance,
            strict_variant=self.strict_variant,
            trim_edges=self.trim_edges,
            aggregation=self.aggregation,
        )


def evaluate(pairs, req: EvalRequest, tolerance=None) -> dict[str, metrics.CorpusReport]:
    base = req.match_config(tolerance)
    out = {}
    for s in req.schemes:
        cfg = metrics.MatchConfig(base.tolerance_sec, s, base.strict_variant,
                                  base.trim_edges, base.aggregation)
        out[s] = metrics.evaluate_corpus(pairs, cfg)
    return out


def run_eval(req: EvalRequest, refs=None, hyps=None) -> str:
    """Evaluate and render. `refs`/`hyps` bypass reading the request paths."""
    refs = _read_segs(req.ref_path) if refs is None else refs
    hyps = _read_segs(req.hyp_path) if hyps is None else hyps
    pairs = metrics.pair_by_id(refs, hyps)
    if req.output_format == "csv":
        tols = list(req.sweep) or [req.tolerance_sec]
        rows = []
        for tol in tols:
            res = evaluate(pairs, req, tol)
            rows.append((tol, {s: r.overall for s, r in res.items()}))
        return report.render_csv(rows)
    results = evaluate(pairs, req)
    if req.output_format == "json":
        return report.dumps(report.corpus_to_json(results, req.match_config()))
    return report.render_table({"hyp": {s: r.overall for s, r in results.items()}})


def _add_eval_args(p):
    p.add_argument("--tolerance", type=float,
                   default=_env_float("PHONESEG_TOLERANCE", 0.02),
                   help="tolerance window on each side of a reference boundary, seconds")
    p.add_argument("--scheme", choices=["strict", "lenient", "both"], default="both")
    p.add_argument("--strict-variant", choices=list(metrics.STRICT_VARIANTS), default="maximum")
    p.add_argument("--trim-edges", action=argparse.BooleanOptionalAction, default=True,
                   help="drop first/last reference boundary (and hypotheses near them)")
    p.add_argument("--aggregation", choices=list(metrics.AGGREGATIONS), default="micro")
    p.add_argument("--format", dest="output_format", choices=["table", "json", "csv"], default="table")
    p.add_argument("--sweep", type=_float_list, default=(),
                   help="comma-separated tolerances; csv output gets one line each")
    p.add_argument("--out", default="-")


def _float_list(s: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in s.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {s!r}")


def _request(args, ref, hyp) -> EvalRequest:
    return EvalRequest(ref, hyp, args.tolerance, args.scheme, args.strict_variant,
                       args.trim_edges, args.aggregation, args.output_format, args.sweep)


def cmd_eval(args):
    text = run_eval(_request(args, args.ref, args.hyp))
    with _open(args.out, "w") as fp:
        fp.write(text)


# --- peaks / probability streams ---------------------------------------------

def read_probabilities(path, index=None) -> list[tuple[str, FrameProbabilitySequence]]:
    """JSONL ``{"id", "probs"}`` records, or raw little-endian float32 with an
    index JSONL of ``{"id", "offset", "n_frames"}`` (offset in values)."""
    if index is None:
        out = []
        with _open(path) as fp:
            for lineno, d in iter_jsonl(fp):
                try:
                    out.append((str(d["id"]), FrameProbabilitySequence(tuple(d["probs"]))))
                except (KeyError, TypeError, InputError) as e:
                    raise InputError(f"{path}:{lineno}: bad probability record ({e})") from e
        return out
    data = np.fromfile(path, dtype="<f4")
    out = []
    with _open(index) as fp:
        for lineno, d in iter_jsonl(fp):
            try:
                off, n = int(d["offset"]), int(d["n_frames"])
                uid = str(d["id"])
            except (KeyError, TypeError, ValueError) as e:
                raise InputError(f"{index}:{lineno}: bad index record ({e})") from e
            if off < 0 or off + n > data.size:
                raise InputError(f"{index}:{lineno}: range {off}+{n} outside {data.size} values")
            out.append((uid, FrameProbabilitySequence(tuple(data[off:off + n].astype(float)))))
    return out


def _timebase(args) -> Timebase:
    return Timebase(frame_stride=args.stride, offset=args.frame_offset)


def _peak_config(args) -> extract.PeakConfig:
    return extract.PeakConfig(args.threshold, args.min_distance, args.plateau)


def _peak_segs(args) -> list[Segmentation]:
    tb, cfg = _timebase(args), _peak_config(args)
    probs = read_probabilities(args.probs, args.index)
    segs = [extract.peaks_to_segmentation(uid, p, tb, cfg) for uid, p in probs]
    return sorted(segs, key=lambda s: s.utterance_id)


def _add_timebase_args(p):
    p.add_argument("--stride", type=float, default=_env_float("PHONESEG_STRIDE", 0.02),
                   help="seconds per frame")
    p.add_argument("--frame-offset", type=float, default=0.0,
                   help="added to frame start times (stride/2 gives frame centres)")


def _add_peak_args(p):
    p.add_argument("--probs", required=True, help="probability JSONL, or float32 file with --index")
    p.add_argument("--index", help="sidecar index for float32 input")
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--min-distance", type=int, default=2, help="frames")
    p.add_argument("--plateau", choices=list(extract.PLATEAU_POLICIES), default="leftmost")
    _add_timebase_args(p)


def cmd_peaks(args):
    segs = _peak_segs(args)
    with _open(args.out, "w") as fp:
        write_segmentations(segs, fp)


def cmd_pipeline(args):
    hyps = _peak_segs(args)
    if args.keep:
        with _open(args.keep, "w") as fp:
            write_segmentations(hyps, fp)
    text = run_eval(_request(args, args.ref, "<peaks>"), hyps=hyps)
    with _open(args.out, "w") as fp:
        fp.write(text)


# --- bootstrap / loss -----------------------------------------------------------

def n_frames_for(seg: Segmentation, tb: Timebase) -> int:
    """Frame count implied by the utterance duration (or its last boundary)."""
    if seg.duration is not None:
        return max(1, math.floor((seg.duration - tb.offset) / tb.frame_stride + 0.5))
    if seg.boundaries:
        return max(1, math.floor((seg.boundaries[-1] - tb.offset) / tb.frame_stride + 0.5) + 1)
    return 1


def cmd_bootstrap(args):
    tb = _timebase(args)
    segs = sorted(_read_segs(args.segs), key=lambda s: s.utterance_id)
    with _open(args.out, "w") as fp:
        for seg in segs:
            labels = extract.bootstrap_labels(seg, tb, n_frames_for(seg, tb))
            fp.write(json.dumps({"id": seg.utterance_id, "labels": list(labels.labels)}) + "\n")


def read_labels(path) -> dict[str, FrameLabelSequence]:
    out = {}
    with _open(path) as fp:
        for lineno, d in iter_jsonl(fp):
            try:
                out[str(d["id"])] = FrameLabelSequence(tuple(d["labels"]))
            except (KeyError, TypeError, InputError) as e:
                raise InputError(f"{path}:{lineno}: bad label record ({e})") from e
    return out


def cmd_loss(args):
    labels = read_labels(args.labels)
    probs = dict(read_probabilities(args.probs))
    missing = sorted(set(labels) ^ set(probs))
    if missing:
        raise metrics.PairingError([f"unpaired utterance: {u}" for u in missing])
    cfg = objective.LossConfig(args.w_star, args.epsilon, args.reduction)
    batch = []
    for u in sorted(labels):
        if len(labels[u]) != len(probs[u]):
            raise InputError(f"{u}: {len(probs[u])} probabilities vs {len(labels[u])} labels")
        batch.append((probs[u], labels[u]))
    loss = objective.weighted_bce_corpus(batch, cfg)
    with _open(args.out, "w") as fp:
        fp.write(report.dumps({
            "loss": loss,
            "n_utterances": len(batch),
            "n_frames": sum(len(p) for p, _ in batch),
            "w_star": cfg.w_star,
            "reduction": cfg.reduction,
        }))


# --- synth ----------------------------------------------------------------------

def cmd_synth(args):
    if args.input:
        src = _read_segs(args.input)
    else:
        src = synthgen.gen_corpus(args.n_utts, args.n_boundaries, args.min_gap,
                                  args.duration, args.seed)
    if args.perturb or args.input:
        cfg = synthgen.PerturbConfig(args.jitter_std, args.p_delete, args.p_insert,
                                     args.insert_margin, args.seed)
        src = synthgen.perturb_corpus(src, cfg)
    with _open(args.out, "w") as fp:
        write_segmentations(src, fp)


# --- convert ----------------------------------------------------------------------

def cmd_convert(args):
    root = Path(args.input)
    if not root.is_dir():
        raise InputError(f"{root}: not a directory")
    if args.format == "timit":
        anns = corpus.load_timit_dir(root, args.sample_rate)
    else:
        anns = corpus.load_buckeye_dir(root)
        nonspeech = set(args.nonspeech.split(",")) if args.nonspeech else corpus.BUCKEYE_NONSPEECH
        anns = [c for a in anns for c in corpus.split_buckeye_chunks(
            a, nonspeech, args.max_edge_nonspeech, args.min_split_gap)]
    if not anns:
        raise InputError(f"{root}: no {args.format} annotation files found")
    segs = sorted((corpus.annotation_to_segmentation(a) for a in anns),
                  key=lambda s: s.utterance_id)
    with _open(args.out, "w") as fp:
        write_segmentations(segs, fp)
    log.info("wrote %d utterances", len(segs))

    if args.seed is not None:
        if args.format == "timit":
            split = corpus.timit_split([a.utterance_id for a in anns], args.seed)
        else:
            sp = corpus.speaker_split([a.speaker_id for a in anns], seed=args.seed)
            split = sp.as_dict()
            split["utterances"] = {
                name: sorted(a.utterance_id for a in anns if a.speaker_id in spk)
                for name, spk in (("train", sp.train), ("valid", sp.valid), ("test", sp.test))
            }
        split_path = args.split_out or (args.out + ".split.json" if args.out != "-" else None)
        if split_path is None:
            raise InputError("--split-out is required when writing to stdout with --seed")
        with _open(split_path, "w") as fp:
            fp.write(report.dumps(split))


# --- report ----------------------------------------------------------------------

def cmd_report(args):
    rows = {}
    for path in args.results:
        label, _, p = path.partition("=") if "=" in path else (Path(path).stem, "", path)
        with _open(p) as fp:
            try:
                rows[label] = report.reports_from_json(json.load(fp))
            except (KeyError, TypeError, json.JSONDecodeError) as e:
                raise InputError(f"{p}: not an eval JSON result ({e})") from e
    schemes = {tuple(sorted(r)) for r in rows.values()}
    if len(schemes) != 1:
        raise InputError("results mix different scheme selections")
    with _open(args.out, "w") as fp:
        if args.output_format == "csv":
            fp.write(report.render_csv(list(rows.items()), key="label"))
        else:
            fp.write(report.render_table(rows))


# --- entry point --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="phoneseg", description=__doc__.split("\n\n")[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("convert", help="corpus annotations -> segmentation JSONL")
    p.add_argument("--format", choices=["timit", "buckeye"], required=True)
    p.add_argument("--in", dest="input", required=True, help="corpus root directory")
    p.add_argument("--out", default="-")
    p.add_argument("--nonspeech", help="comma-separated Buckeye non-speech labels")
    p.add_argument("--min-split-gap", type=float, default=corpus.DEFAULT_MIN_SPLIT_GAP)
    p.add_argument("--max-edge-nonspeech", type=float, default=0.02)
    p.add_argument("--sample-rate", type=int, default=16000)
    p.add_argument("--seed", type=int, help="also write a train/valid/test split")
    p.add_argument("--split-out", help="split file (default: OUT.split.json)")
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("eval", help="score hypothesis boundaries against a reference")
    p.add_argument("--ref", required=True)
    p.add_argument("--hyp", required=True)
    _add_eval_args(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("peaks", help="frame probabilities -> segmentation JSONL")
    _add_peak_args(p)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_peaks)

    p = sub.add_parser("pipeline", help="peaks then eval")
    _add_peak_args(p)
    p.add_argument("--ref", required=True)
    p.add_argument("--keep", help="also write the intermediate hypothesis JSONL here")
    _add_eval_args(p)
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("bootstrap", help="segmentation JSONL -> frame-label JSONL")
    p.add_argument("--segs", required=True)
    p.add_argument("--out", default="-")
    _add_timebase_args(p)
    p.set_defaults(func=cmd_bootstrap)

    p = sub.add_parser("loss", help="weighted BCE of probabilities against frame labels")
    p.add_argument("--labels", required=True)
    p.add_argument("--probs", required=True)
    p.add_argument("--w-star", type=float, default=1.0)
    p.add_argument("--epsilon", type=float, default=1e-7)
    p.add_argument("--reduction", choices=list(objective.REDUCTIONS), default="sum")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_loss)

    p = sub.add_parser("synth", help="synthetic segmentations, optionally perturbed")
    p.add_argument("--in", dest="input", help="perturb this segmentation JSONL instead of generating")
    p.add_argument("--n-utts", type=int, default=20)
    p.add_argument("--n-boundaries", type=int, default=30)
    p.add_argument("--min-gap", type=float, default=0.05)
    p.add_argument("--duration", type=float, default=3.0)
    p.add_argument("--perturb", action="store_true", help="perturb the generated corpus")
    p.add_argument("--jitter-std", type=float, default=0.0)
    p.add_argument("--p-delete", type=float, default=0.0)
    p.add_argument("--p-insert", type=float, default=0.0)
    p.add_argument("--insert-margin", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("report", help="combine eval JSON results into one table")
    p.add_argument("results", nargs="+", help="eval JSON files, optionally LABEL=PATH")
    p.add_argument("--format", dest="output_format", choices=["table", "csv"], default="table")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_report)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except EvaluationError as e:
        print(f"phoneseg: {e}", file=sys.stderr)
        return 1
    except (InputError, OSError) as e:
        print(f"phoneseg: {e}", file=sys.stderr)
        return 2
    except ValueError as e:
        # bad config values (negative tolerance, thresholds out of range, ...)
        print(f"phoneseg: {e}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
