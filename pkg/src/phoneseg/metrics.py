"""Boundary hit counting under the strict and lenient schemes, and the
precision / recall / F1 / over-segmentation / R-value stack built on it.

Lenient counting lets one reference boundary validate several predictions
(and one prediction several references), so precision hits and recall hits
are counted independently. Strict counting is a one-to-one matching: once a
reference is used it is gone, and both hit counts equal the matching size.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .core import EvaluationError, InputError, Segmentation

# absorbs float noise so that |(p-1)*0.02 - p*0.02| <= 0.02 holds
TIME_SLACK = 1e-9

SCHEMES = ("strict", "lenient")
STRICT_VARIANTS = ("maximum", "sequential")
AGGREGATIONS = ("micro", "macro")


@dataclass(frozen=True)
class MatchConfig:
    tolerance_sec: float = 0.02
    scheme: str = "strict"
    strict_variant: str = "maximum"
    trim_edges: bool = True
    aggregation: str = "micro"

    def __post_init__(self):
        if not self.tolerance_sec >= 0:
            raise ValueError(f"tolerance_sec must be >= 0, got {self.tolerance_sec}")
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.strict_variant not in STRICT_VARIANTS:
            raise ValueError(f"unknown strict variant {self.strict_variant!r}")
        if self.aggregation not in AGGREGATIONS:
            raise ValueError(f"unknown aggregation {self.aggregation!r}")


@dataclass(frozen=True)
class MatchResult:
    hits_precision: int
    hits_recall: int
    n_hyp: int
    n_ref: int
    pairs: tuple[tuple[int, int], ...] = ()

    def __add__(self, other: "MatchResult") -> "MatchResult":
        # pairs index into per-utterance lists and are meaningless once summed
        return MatchResult(
            self.hits_precision + other.hits_precision,
            self.hits_recall + other.hits_recall,
            self.n_hyp + other.n_hyp,
            self.n_ref + other.n_ref,
        )


@dataclass(frozen=True)
class MetricsReport:
    precision: float
    recall: float
    f1: float
    os: float
    r_value: float
    counts: MatchResult

    def as_dict(self) -> dict:
        c = self.counts
        return {
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "os": self.os,
            "r_value": self.r_value,
            "counts": {
                "hits_precision": c.hits_precision,
                "hits_recall": c.hits_recall,
                "n_hyp": c.n_hyp,
                "n_ref": c.n_ref,
            },
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MetricsReport":
        c = d["counts"]
        counts = MatchResult(c["hits_precision"], c["hits_recall"], c["n_hyp"], c["n_ref"])
        return cls(d["precision"], d["recall"], d["f1"], d["os"], d["r_value"], counts)


def _within(a: float, b: float, tol: float) -> bool:
    return abs(a - b) <= tol + TIME_SLACK


def match_lenient(ref: Segmentation, hyp: Segmentation, cfg: MatchConfig) -> MatchResult:
    r, h = ref.boundaries, hyp.boundaries
    tol = cfg.tolerance_sec
    return MatchResult(
        hits_precision=_count_covered(h, r, tol),
        hits_recall=_count_covered(r, h, tol),
        n_hyp=len(h),
        n_ref=len(r),
    )


def _count_covered(points: Sequence[float], anchors: Sequence[float], tol: float) -> int:
    """Number of `points` with at least one anchor within `tol` (both sorted)."""
    n = 0
    j = 0
    for p in points:
        while j < len(anchors) and anchors[j] < p - tol - TIME_SLACK:
            j += 1
        if j < len(anchors) and _within(anchors[j], p, tol):
            n += 1
    return n


def match_strict(ref: Segmentation, hyp: Segmentation, cfg: MatchConfig) -> MatchResult:
    if cfg.strict_variant == "maximum":
        pairs = _maximum_pairs(ref.boundaries, hyp.boundaries, cfg.tolerance_sec)
    else:
        pairs = _sequential_pairs(ref.boundaries, hyp.boundaries, cfg.tolerance_sec)
    return MatchResult(len(pairs), len(pairs), len(hyp), len(ref), tuple(pairs))


def _maximum_pairs(ref, hyp, tol):
    # Every hyp is compatible with a contiguous run of refs, and the runs move
    # right monotonically, so pairing each hyp with the earliest unused
    # compatible ref yields a maximum-cardinality matching.
    pairs = []
    j = 0
    for i, h in enumerate(hyp):
        while j < len(ref) and ref[j] < h - tol - TIME_SLACK:
            j += 1
        if j == len(ref):
            break
        if _within(ref[j], h, tol):
            pairs.append((i, j))
            j += 1
    return pairs


def _sequential_pairs(ref, hyp, tol):
    # hyp in temporal order, each takes the nearest free ref (earlier on ties)
    used = [False] * len(ref)
    pairs = []
    lo = 0
    for i, h in enumerate(hyp):
        while lo < len(ref) and ref[lo] < h - tol - TIME_SLACK:
            lo += 1
        best = None
        j = lo
        while j < len(ref) and _within(ref[j], h, tol):
            if not used[j] and (best is None or abs(ref[j] - h) < abs(ref[best] - h)):
                best = j
            j += 1
        if best is not None:
            used[best] = True
            pairs.append((i, best))
    return pairs


def match(ref: Segmentation, hyp: Segmentation, cfg: MatchConfig) -> MatchResult:
    if cfg.scheme == "strict":
        return match_strict(ref, hyp, cfg)
    return match_lenient(ref, hyp, cfg)


def r_value(hit_rate: float, over_segmentation: float) -> float:
    """R-value from hit rate and over-segmentation, both in percent."""
    r1 = math.sqrt((100.0 - hit_rate) ** 2 + over_segmentation ** 2)
    r2 = (-over_segmentation + hit_rate - 100.0) / math.sqrt(2)
    return 1.0 - (abs(r1) + abs(r2)) / 200.0


def compute_metrics(mr: MatchResult) -> MetricsReport:
    if mr.n_ref == 0:
        raise EvaluationError("no reference boundaries: over-segmentation is undefined")
    if mr.n_hyp == 0:
        precision = 0.0
    else:
        precision = mr.hits_precision / mr.n_hyp
    recall = mr.hits_recall / mr.n_ref
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    os_ = (mr.n_hyp / mr.n_ref - 1.0) * 100.0
    return MetricsReport(precision, recall, f1, os_, r_value(100.0 * recall, os_), mr)


def trim_edges(ref: Segmentation, hyp: Segmentation, tol: float) -> tuple[Segmentation, Segmentation]:
    """Drop the first and last reference boundary, and any hypothesis boundary
    within `tol` of either dropped edge."""
    if not ref.boundaries:
        return ref, hyp
    edges = {ref.boundaries[0], ref.boundaries[-1]}
    kept_ref = ref.boundaries[1:-1]
    kept_hyp = tuple(h for h in hyp.boundaries if not any(_within(h, e, tol) for e in edges))
    return (
        Segmentation(ref.utterance_id, kept_ref, ref.duration),
        Segmentation(hyp.utterance_id, kept_hyp, hyp.duration),
    )


def evaluate_pair(ref: Segmentation, hyp: Segmentation, cfg: MatchConfig) -> MatchResult:
    if cfg.trim_edges:
        ref, hyp = trim_edges(ref, hyp, cfg.tolerance_sec)
    return match(ref, hyp, cfg)


@dataclass
class CorpusReport:
    overall: MetricsReport
    per_utterance: dict[str, MetricsReport] = field(default_factory=dict)
    counts: dict[str, MatchResult] = field(default_factory=dict)


def pair_by_id(
    refs: Iterable[Segmentation], hyps: Iterable[Segmentation]
) -> list[tuple[Segmentation, Segmentation]]:
    """Pair reference and hypothesis segmentations by utterance id, sorted by id."""
    ref_map = {s.utterance_id: s for s in refs}
    hyp_map = {s.utterance_id: s for s in hyps}
    missing_hyp = sorted(set(ref_map) - set(hyp_map))
    missing_ref = sorted(set(hyp_map) - set(ref_map))
    if missing_hyp or missing_ref:
        lines = [f"reference without hypothesis: {u}" for u in missing_hyp]
        lines += [f"hypothesis without reference: {u}" for u in missing_ref]
        raise PairingError(lines)
    return [(ref_map[u], hyp_map[u]) for u in sorted(ref_map)]


class PairingError(InputError):
    def __init__(self, offenders: list[str]):
        self.offenders = offenders
        super().__init__(
            f"{len(offenders)} unpaired utterance(s):\n  " + "\n  ".join(offenders)
        )


def evaluate_corpus(
    pairs: Sequence[tuple[Segmentation, Segmentation]], cfg: MatchConfig
) -> CorpusReport:
    """Evaluate paired segmentations and aggregate.

    micro sums hits and counts over utterances before computing metrics; macro
    averages the per-utterance metrics. Under micro, an utterance whose
    reference is empty after trimming only contributes its hypothesis count;
    under macro it raises `EvaluationError`.
    """
    mismatched = [
        f"{r.utterance_id} != {h.utterance_id}" for r, h in pairs if r.utterance_id != h.utterance_id
    ]
    if mismatched:
        raise PairingError(mismatched)
    if not pairs:
        raise EvaluationError("empty corpus")

    counts = {r.utterance_id: evaluate_pair(r, h, cfg) for r, h in pairs}
    per_utt = {u: compute_metrics(mr) for u, mr in counts.items() if mr.n_ref > 0}

    total = MatchResult(0, 0, 0, 0)
    for mr in counts.values():
        total = total + mr

    if cfg.aggregation == "micro":
        overall = compute_metrics(total)
    else:
        empty = sorted(set(counts) - set(per_utt))
        if empty:
            raise EvaluationError(
                "empty reference after edge trimming: " + ", ".join(empty)
            )
        reps = list(per_utt.values())
        n = len(reps)
        overall = MetricsReport(
            precision=math.fsum(m.precision for m in reps) / n,
            recall=math.fsum(m.recall for m in reps) / n,
            f1=math.fsum(m.f1 for m in reps) / n,
            os=math.fsum(m.os for m in reps) / n,
            r_value=math.fsum(m.r_value for m in reps) / n,
            counts=total,
        )
    return CorpusReport(overall, per_utt, counts)
