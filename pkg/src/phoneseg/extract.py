"""Frame probabilities -> boundary lists (peak picking), and boundary lists ->
frame targets for training on another model's predictions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    FrameLabelSequence,
    FrameProbabilitySequence,
    Segmentation,
    Timebase,
    bin_boundaries,
    frames_to_times,
)

PLATEAU_POLICIES = ("leftmost", "center")


@dataclass(frozen=True)
class PeakConfig:
    threshold: float = 0.5
    min_distance_frames: int = 2
    plateau_policy: str = "leftmost"

    def __post_init__(self):
        if not 0.0 <= self.threshold <= 1.0:
            raise ValueError(f"threshold must lie in [0, 1], got {self.threshold}")
        if self.min_distance_frames < 1:
            raise ValueError(f"min_distance_frames must be >= 1, got {self.min_distance_frames}")
        if self.plateau_policy not in PLATEAU_POLICIES:
            raise ValueError(f"unknown plateau policy {self.plateau_policy!r}")


def _plateau_peaks(p: np.ndarray):
    """Yield (start, stop) of every maximal run of equal values whose
    neighbours on both sides are lower (a missing neighbour counts as lower)."""
    n = len(p)
    i = 0
    while i < n:
        j = i + 1
        while j < n and p[j] == p[i]:
            j += 1
        left_ok = i == 0 or p[i - 1] < p[i]
        right_ok = j == n or p[j] < p[i]
        if left_ok and right_ok:
            yield i, j
        i = j


def pick_peaks(probs: FrameProbabilitySequence, cfg: PeakConfig = PeakConfig()) -> list[int]:
    """Frame indices of local maxima at or above `cfg.threshold`.

    Every frame of a flat-topped maximum is a candidate. Candidates are then
    accepted greedily from the highest value down, skipping any closer than
    `min_distance_frames` to one already accepted. Among equal values the
    earlier frame wins, or under the ``center`` policy the frame nearest its
    plateau's centre. So with ``min_distance_frames=1`` a plateau is kept
    whole, and wider spacing thins it according to the policy.
    """
    p = np.asarray(probs.probs, dtype=float)
    cands = []  # (value, tie_key, index)
    for start, stop in _plateau_peaks(p):
        if p[start] < cfg.threshold:
            continue
        centre = (start + stop - 1) / 2.0
        for k in range(start, stop):
            tie = abs(k - centre) if cfg.plateau_policy == "center" else 0.0
            cands.append((-p[k], tie, k))
    cands.sort()

    taken = np.zeros(len(p), dtype=bool)
    kept = []
    d = cfg.min_distance_frames
    for _, _, k in cands:
        lo, hi = max(0, k - d + 1), min(len(p), k + d)
        if taken[lo:hi].any():
            continue
        taken[k] = True
        kept.append(k)
    return sorted(kept)


def peaks_to_segmentation(
    utterance_id: str,
    probs: FrameProbabilitySequence,
    tb: Timebase,
    cfg: PeakConfig = PeakConfig(),
) -> Segmentation:
    times = frames_to_times(pick_peaks(probs, cfg), tb)
    return Segmentation(utterance_id, tuple(times), len(probs) * tb.frame_stride + tb.offset)


def bootstrap_labels(hyp: Segmentation, tb: Timebase, n_frames: int) -> FrameLabelSequence:
    """Frame-wise targets from another model's predicted boundaries."""
    return bin_boundaries(hyp, tb, n_frames)


def binary_labels_to_segmentation(
    labels: FrameLabelSequence, tb: Timebase, utterance_id: str = ""
) -> Segmentation:
    times = frames_to_times(labels.ones(), tb)
    return Segmentation(utterance_id, tuple(times), len(labels) * tb.frame_stride + tb.offset)
