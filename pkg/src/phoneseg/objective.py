"""Boundary-weighted binary cross-entropy and its analytic gradient.

The loss is written with the conventional leading minus so that it is
non-negative and minimised by good predictions:

    L = -sum_j [ w * y_j * log(p_j) + (1 - y_j) * log(1 - p_j) ]

where `w` (``w_star``) up-weights frames labelled as boundaries. Probabilities
are clamped to [eps, 1 - eps] before taking logs; the gradient is evaluated
at the clamped value too.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .core import InputError

REDUCTIONS = ("sum", "mean")


@dataclass(frozen=True)
class LossConfig:
    w_star: float = 1.0
    epsilon: float = 1e-7
    reduction: str = "sum"

    def __post_init__(self):
        if not self.w_star > 0:
            raise ValueError(f"w_star must be strictly positive, got {self.w_star}")
        if not 0 < self.epsilon < 0.5:
            raise ValueError(f"epsilon must lie in (0, 0.5), got {self.epsilon}")
        if self.reduction not in REDUCTIONS:
            raise ValueError(f"unknown reduction {self.reduction!r}")


def _prepare(probs, labels, cfg):
    p = np.asarray(getattr(probs, "probs", probs), dtype=np.float64)
    y = np.asarray(getattr(labels, "labels", labels), dtype=np.float64)
    if p.shape != y.shape:
        raise InputError(f"length mismatch: {p.shape[0]} probabilities vs {y.shape[0]} labels")
    return np.clip(p, cfg.epsilon, 1.0 - cfg.epsilon), y


def weighted_bce(probs, labels, cfg: LossConfig = LossConfig()) -> float:
    p, y = _prepare(probs, labels, cfg)
    terms = cfg.w_star * y * np.log(p) + (1.0 - y) * np.log1p(-p)
    loss = -float(np.sum(terms))
    if cfg.reduction == "mean" and p.size:
        loss /= p.size
    return loss


def weighted_bce_grad(probs, labels, cfg: LossConfig = LossConfig()) -> np.ndarray:
    """d loss / d p_j for each frame."""
    p, y = _prepare(probs, labels, cfg)
    g = -cfg.w_star * y / p + (1.0 - y) / (1.0 - p)
    if cfg.reduction == "mean" and p.size:
        g /= p.size
    return g


def weighted_bce_corpus(
    batch: Iterable[tuple[Sequence[float], Sequence[int]]], cfg: LossConfig = LossConfig()
) -> float:
    """Loss over many utterances: summed, or averaged over all frames for ``mean``."""
    total = 0.0
    n_frames = 0
    per_utt = LossConfig(cfg.w_star, cfg.epsilon, "sum")
    for probs, labels in batch:
        total += weighted_bce(probs, labels, per_utt)
        n_frames += len(getattr(probs, "probs", probs))
    if cfg.reduction == "mean" and n_frames:
        total /= n_frames
    return total
