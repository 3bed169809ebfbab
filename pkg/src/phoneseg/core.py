"""Time/frame data model shared by the rest of the package.

All timestamps are float seconds. Sample counts from corpus files are
converted on parse, frame indices are converted through a `Timebase`.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import IO, Iterable, Iterator, Optional, Sequence

# round-half-up guard: 0.03 / 0.02 evaluates to 1.4999999999999998
_ROUND_SLACK = 1e-9


class PhonesegError(Exception):
    """Base class for all package errors."""


class InputError(PhonesegError):
    """Malformed or inconsistent input data (CLI exit code 2)."""


class OutOfRangeError(InputError):
    pass


class EvaluationError(PhonesegError):
    """Evaluation is undefined for the given data (CLI exit code 1)."""


@dataclass(frozen=True)
class Timebase:
    sample_rate: int = 16000
    frame_stride: float = 0.02
    # added to frame_index * frame_stride; use frame_stride / 2 for frame centres
    offset: float = 0.0

    def __post_init__(self):
        if self.sample_rate <= 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        if not self.frame_stride > 0:
            raise ValueError(f"frame_stride must be positive, got {self.frame_stride}")


@dataclass(frozen=True)
class Segmentation:
    utterance_id: str
    boundaries: tuple[float, ...] = ()
    duration: Optional[float] = None

    def __post_init__(self):
        b = tuple(float(t) for t in self.boundaries)
        object.__setattr__(self, "boundaries", b)
        for t in b:
            if not math.isfinite(t) or t < 0:
                raise InputError(f"{self.utterance_id}: invalid boundary {t!r}")
        for a, c in zip(b, b[1:]):
            if not c > a:
                raise InputError(
                    f"{self.utterance_id}: boundaries not strictly increasing ({a!r}, {c!r})"
                )
        if self.duration is not None:
            d = float(self.duration)
            object.__setattr__(self, "duration", d)
            if b and b[-1] > d:
                raise InputError(
                    f"{self.utterance_id}: boundary {b[-1]!r} beyond duration {d!r}"
                )

    def __len__(self):
        return len(self.boundaries)

    @classmethod
    def from_unsorted(cls, utterance_id: str, times: Iterable[float], duration=None):
        """Sort and deduplicate `times` before building."""
        return cls(utterance_id, tuple(sorted(set(float(t) for t in times))), duration)


@dataclass(frozen=True)
class FrameLabelSequence:
    labels: tuple[int, ...] = ()

    def __post_init__(self):
        labels = tuple(int(v) for v in self.labels)
        if any(v not in (0, 1) for v in labels):
            raise InputError("frame labels must be 0 or 1")
        object.__setattr__(self, "labels", labels)

    def __len__(self):
        return len(self.labels)

    def ones(self) -> list[int]:
        return [i for i, v in enumerate(self.labels) if v]


@dataclass(frozen=True)
class FrameProbabilitySequence:
    probs: tuple[float, ...] = ()

    def __post_init__(self):
        probs = tuple(float(p) for p in self.probs)
        if any(not (0.0 <= p <= 1.0) for p in probs):
            raise InputError("frame probabilities must lie in [0, 1]")
        object.__setattr__(self, "probs", probs)

    def __len__(self):
        return len(self.probs)


def time_to_frame(t: float, tb: Timebase) -> int:
    """Nearest frame index for time `t`, rounding halves up."""
    return math.floor((t - tb.offset) / tb.frame_stride + 0.5 + _ROUND_SLACK)


def bin_boundaries(seg: Segmentation, tb: Timebase, n_frames: int) -> FrameLabelSequence:
    """Render boundary timestamps as a per-frame binary sequence of length `n_frames`.

    Boundaries falling on the same frame collapse to a single 1. Times up to one
    stride past the last frame are clamped onto it; anything further raises
    `OutOfRangeError`.
    """
    if n_frames <= 0:
        raise ValueError(f"n_frames must be positive, got {n_frames}")
    limit = n_frames * tb.frame_stride + tb.frame_stride + tb.offset
    labels = [0] * n_frames
    for t in seg.boundaries:
        if t > limit + _ROUND_SLACK:
            raise OutOfRangeError(
                f"{seg.utterance_id}: boundary {t!r}s beyond {n_frames} frames "
                f"of {tb.frame_stride}s"
            )
        idx = min(max(time_to_frame(t, tb), 0), n_frames - 1)
        labels[idx] = 1
    return FrameLabelSequence(tuple(labels))


def frames_to_times(indices: Sequence[int], tb: Timebase) -> list[float]:
    return [i * tb.frame_stride + tb.offset for i in indices]


# --- canonical JSONL -------------------------------------------------------

def segmentation_to_dict(seg: Segmentation) -> dict:
    d = {"id": seg.utterance_id, "boundaries_sec": list(seg.boundaries)}
    if seg.duration is not None:
        d["duration_sec"] = seg.duration
    return d


def segmentation_from_dict(d: dict) -> Segmentation:
    try:
        return Segmentation(str(d["id"]), tuple(d["boundaries_sec"]), d.get("duration_sec"))
    except (KeyError, TypeError) as e:
        raise InputError(f"bad segmentation record {d!r}: {e}") from e


def iter_jsonl(fp: IO[str]) -> Iterator[tuple[int, dict]]:
    for lineno, line in enumerate(fp, 1):
        line = line.strip()
        if not line:
            continue
        try:
            yield lineno, json.loads(line)
        except json.JSONDecodeError as e:
            raise InputError(f"line {lineno}: invalid JSON ({e.msg})") from e


def read_segmentations(fp: IO[str]) -> list[Segmentation]:
    segs = []
    seen = set()
    for lineno, d in iter_jsonl(fp):
        try:
            seg = segmentation_from_dict(d)
        except InputError as e:
            raise InputError(f"line {lineno}: {e}") from e
        if seg.utterance_id in seen:
            raise InputError(f"line {lineno}: duplicate utterance id {seg.utterance_id!r}")
        seen.add(seg.utterance_id)
        segs.append(seg)
    return segs


def write_segmentations(segs: Iterable[Segmentation], fp: IO[str]) -> None:
    for seg in segs:
        fp.write(json.dumps(segmentation_to_dict(seg)) + "\n")
