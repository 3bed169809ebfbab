"""Seeded synthetic segmentations and perturbations for metric tests and demos.

Randomness comes from numpy's ``default_rng(seed)`` (PCG64), so a given seed
reproduces the same output on every platform numpy supports.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Segmentation

_MAX_INSERT_TRIES = 100


@dataclass(frozen=True)
class PerturbConfig:
    jitter_std_sec: float = 0.0
    p_delete: float = 0.0
    p_insert: float = 0.0
    insert_margin_sec: float = 0.05
    seed: int = 0

    def __post_init__(self):
        if self.jitter_std_sec < 0:
            raise ValueError("jitter_std_sec must be non-negative")
        for name in ("p_delete", "p_insert"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        if not self.insert_margin_sec > 0:
            raise ValueError("insert_margin_sec must be positive")


def gen_segmentation(
    n_boundaries: int,
    min_gap_sec: float,
    duration: float,
    seed: int,
    utterance_id: str = "synth",
) -> Segmentation:
    """`n_boundaries` sorted times in [0, duration], consecutive gaps >= `min_gap_sec`."""
    if n_boundaries < 0 or min_gap_sec < 0 or duration < 0:
        raise ValueError("n_boundaries, min_gap_sec and duration must be non-negative")
    if n_boundaries * min_gap_sec > duration:
        raise ValueError(
            f"infeasible: {n_boundaries} boundaries x {min_gap_sec}s gap exceed {duration}s"
        )
    if n_boundaries == 0:
        return Segmentation(utterance_id, (), duration)
    rng = np.random.default_rng(seed)
    slack = duration - (n_boundaries - 1) * min_gap_sec
    u = np.sort(rng.uniform(0.0, slack, size=n_boundaries))
    out = [float(u[0])]
    for t in (u + min_gap_sec * np.arange(n_boundaries))[1:]:
        t = float(t)
        # keep the gap floor exact under float rounding
        while t - out[-1] < min_gap_sec:
            t = float(np.nextafter(t, np.inf))
        out.append(t)
    return Segmentation(utterance_id, tuple(out), max(duration, out[-1]))


def _truncated_normal(rng, std, size, bound=3.0):
    z = rng.standard_normal(size)
    bad = np.abs(z) > bound
    while bad.any():
        z[bad] = rng.standard_normal(int(bad.sum()))
        bad = np.abs(z) > bound
    return z * std


def perturb(seg: Segmentation, cfg: PerturbConfig) -> Segmentation:
    """Jitter (Gaussian truncated at 3 sigma), delete and insert boundaries.

    Each original boundary is deleted with probability `p_delete`, and
    independently spawns a spurious boundary with probability `p_insert`,
    placed uniformly at least `insert_margin_sec` from every original.
    Insertions that find no free spot within the utterance are skipped.
    """
    rng = np.random.default_rng(cfg.seed)
    orig = np.asarray(seg.boundaries, dtype=float)
    n = orig.size
    upper = seg.duration if seg.duration is not None else (
        float(orig[-1]) + 2 * cfg.insert_margin_sec if n else 0.0
    )

    jitter = _truncated_normal(rng, cfg.jitter_std_sec, n) if cfg.jitter_std_sec > 0 else np.zeros(n)
    keep = rng.random(n) >= cfg.p_delete
    spawn = rng.random(n) < cfg.p_insert

    times = np.clip(orig + jitter, 0.0, upper)[keep].tolist()
    for _ in range(int(spawn.sum())):
        for _ in range(_MAX_INSERT_TRIES):
            t = float(rng.uniform(0.0, upper))
            if n == 0 or np.min(np.abs(orig - t)) >= cfg.insert_margin_sec:
                times.append(t)
                break
    return Segmentation.from_unsorted(seg.utterance_id, times, seg.duration)


def gen_corpus(
    n_utts: int,
    n_boundaries: int,
    min_gap_sec: float,
    duration: float,
    seed: int,
    prefix: str = "utt",
) -> list[Segmentation]:
    ss = np.random.SeedSequence(seed)
    seeds = ss.generate_state(n_utts)
    return [
        gen_segmentation(n_boundaries, min_gap_sec, duration, int(s), f"{prefix}{k:04d}")
        for k, s in enumerate(seeds)
    ]


def perturb_corpus(segs, cfg: PerturbConfig) -> list[Segmentation]:
    seeds = np.random.SeedSequence(cfg.seed).generate_state(len(segs))
    return [
        perturb(s, PerturbConfig(cfg.jitter_std_sec, cfg.p_delete, cfg.p_insert,
                                 cfg.insert_margin_sec, int(k)))
        for s, k in zip(segs, seeds)
    ]
