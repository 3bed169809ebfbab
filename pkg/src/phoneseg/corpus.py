"""TIMIT and Buckeye phone-level annotation parsing, Buckeye chunking at long
non-speech runs, and speaker / utterance level dataset splits."""

from __future__ import annotations

import logging
import math
import random
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .core import InputError, Segmentation

log = logging.getLogger(__name__)


class ParseError(InputError):
    pass


class OrderingError(InputError):
    pass


# Non-speech tags found in Buckeye .phones files. Release-dependent, so the
# chunker takes the set as an argument and this is only the default.
BUCKEYE_NONSPEECH = frozenset({
    "SIL", "<SIL>", "{B_TRANS}", "{E_TRANS}", "B_TRANS", "E_TRANS",
    "IVER", "<IVER>", "NOISE", "<NOISE>", "VOCNOISE", "<VOCNOISE>",
    "LAUGH", "<LAUGH>", "UNKNOWN", "<UNKNOWN>", "CUTOFF", "ERROR",
    "EXCLUDE", "<EXCLUDE>", "<EXT>", "h#", "pau", "",
})

DEFAULT_MIN_SPLIT_GAP = 0.5


@dataclass(frozen=True)
class UtteranceAnnotation:
    utterance_id: str
    speaker_id: str = ""
    intervals: tuple[tuple[float, float, str], ...] = ()
    # start of this annotation inside its source recording (non-zero for chunks)
    offset_sec: float = 0.0

    def __post_init__(self):
        ivs = tuple((float(s), float(e), str(lab)) for s, e, lab in self.intervals)
        object.__setattr__(self, "intervals", ivs)
        prev_end = -math.inf
        for s, e, lab in ivs:
            if not s < e:
                raise OrderingError(f"{self.utterance_id}: empty interval ({s}, {e}, {lab!r})")
            if s < prev_end:
                raise OrderingError(
                    f"{self.utterance_id}: interval ({s}, {e}, {lab!r}) overlaps its predecessor"
                )
            prev_end = e

    @property
    def duration(self) -> float:
        return self.intervals[-1][1] if self.intervals else 0.0


@dataclass(frozen=True)
class SpeakerSplit:
    train: frozenset
    valid: frozenset
    test: frozenset
    seed: int

    def as_dict(self) -> dict:
        return {
            "seed": self.seed,
            "train": sorted(self.train),
            "valid": sorted(self.valid),
            "test": sorted(self.test),
        }


def parse_timit_phn(
    text: str, sample_rate: int = 16000, utterance_id: str = "", speaker_id: str = ""
) -> UtteranceAnnotation:
    """Parse a TIMIT .phn file: one `start_sample end_sample label` per line."""
    intervals = []
    prev_start = -1
    for lineno, line in enumerate(text.splitlines(), 1):
        parts = line.split()
        if not parts:
            continue
        if len(parts) != 3:
            raise ParseError(f"{utterance_id or '<phn>'}:{lineno}: expected 3 fields, got {line!r}")
        try:
            start, end = int(parts[0]), int(parts[1])
        except ValueError:
            raise ParseError(
                f"{utterance_id or '<phn>'}:{lineno}: non-integer sample index in {line!r}"
            ) from None
        if start < prev_start or end < start:
            raise OrderingError(f"{utterance_id or '<phn>'}:{lineno}: decreasing sample index")
        prev_start = start
        intervals.append((start / sample_rate, end / sample_rate, parts[2]))
    return UtteranceAnnotation(utterance_id, speaker_id, tuple(intervals))


def parse_buckeye_phones(text: str, utterance_id: str = "", speaker_id: str = "") -> UtteranceAnnotation:
    """Parse a Buckeye .phones file.

    The header runs up to a line holding a lone ``#``; each record after it is
    ``end_time color label`` (label may be missing, and may carry ``;``
    comments). Interval starts come from the previous record's end, the first
    starting at 0. Zero-length records are dropped.
    """
    lines = text.splitlines()
    for i, line in enumerate(lines):
        if line.strip() == "#":
            body_start = i + 1
            break
    else:
        raise ParseError(f"{utterance_id or '<phones>'}: missing '#' header terminator")

    intervals = []
    prev = 0.0
    for lineno, line in enumerate(lines[body_start:], body_start + 1):
        record = line.split(";", 1)[0].split()
        if not record:
            continue
        try:
            end = float(record[0])
        except ValueError:
            raise ParseError(f"{utterance_id or '<phones>'}:{lineno}: bad timestamp in {line!r}") from None
        label = record[2] if len(record) > 2 else ""
        if end < prev:
            raise OrderingError(
                f"{utterance_id or '<phones>'}:{lineno}: time {end} precedes previous {prev}"
            )
        if end == prev:
            log.debug("%s:%d: dropping zero-length record %r", utterance_id, lineno, label)
            continue
        intervals.append((prev, end, label))
        prev = end
    return UtteranceAnnotation(utterance_id, speaker_id, tuple(intervals))


def annotation_to_segmentation(ann: UtteranceAnnotation) -> Segmentation:
    if not ann.intervals:
        return Segmentation(ann.utterance_id, (), None)
    times = {s for s, _, _ in ann.intervals}
    times.add(ann.intervals[-1][1])
    return Segmentation.from_unsorted(ann.utterance_id, times, ann.duration)


def _runs(intervals, is_nonspeech):
    """Group consecutive intervals into (is_nonspeech, [intervals]) runs."""
    runs = []
    for iv in intervals:
        ns = is_nonspeech(iv)
        if runs and runs[-1][0] == ns and runs[-1][1][-1][1] == iv[0]:
            runs[-1][1].append(iv)
        else:
            runs.append((ns, [iv]))
    return runs


def split_buckeye_chunks(
    ann: UtteranceAnnotation,
    nonspeech_labels: Iterable[str] = BUCKEYE_NONSPEECH,
    max_edge_nonspeech_sec: float = 0.02,
    min_split_gap: float = DEFAULT_MIN_SPLIT_GAP,
) -> list[UtteranceAnnotation]:
    """Cut a recording into continuous speech chunks.

    A run of consecutive non-speech intervals longer than `min_split_gap`
    separates chunks; shorter runs stay inside. Each chunk keeps at most
    `max_edge_nonspeech_sec` of non-speech before its first and after its last
    speech interval. Chunk times are re-zeroed; `offset_sec` records where the
    chunk starts in the recording.
    """
    nonspeech = frozenset(nonspeech_labels)
    if not nonspeech:
        raise ValueError("nonspeech_labels must not be empty")

    def is_ns(iv):
        return iv[2] in nonspeech

    groups: list[list[tuple[float, float, str]]] = [[]]
    for ns, run in _runs(ann.intervals, is_ns):
        if ns and run[-1][1] - run[0][0] > min_split_gap:
            # the long run is shared context: each side may keep an edge of it
            groups[-1].extend(run)
            groups.append(list(run))
        else:
            groups[-1].extend(run)

    chunks = []
    for group in groups:
        speech_idx = [i for i, iv in enumerate(group) if not is_ns(iv)]
        if not speech_idx:
            continue
        first, last = speech_idx[0], speech_idx[-1]
        start = max(group[first][0] - max_edge_nonspeech_sec, group[0][0])
        end = min(group[last][1] + max_edge_nonspeech_sec, group[-1][1])
        kept = []
        for s, e, lab in group:
            s2, e2 = max(s, start), min(e, end)
            if e2 > s2:
                kept.append((s2, e2, lab))
        chunks.append(kept)

    if len(chunks) == 1 and chunks[0] == list(ann.intervals) and ann.intervals[0][0] == 0.0:
        return [ann]
    out = []
    for k, kept in enumerate(chunks):
        origin = kept[0][0]
        out.append(UtteranceAnnotation(
            f"{ann.utterance_id}_{k:03d}",
            ann.speaker_id,
            tuple((s - origin, e - origin, lab) for s, e, lab in kept),
            ann.offset_sec + origin,
        ))
    return out


def speaker_split(
    speakers: Sequence[str], ratios: Sequence[float] = (0.8, 0.1, 0.1), seed: int = 0
) -> SpeakerSplit:
    """Random speaker-level train/valid/test partition, deterministic in `seed`.

    Valid and test sizes are the rounded shares of the speaker count (at least
    one each); train takes the rest.
    """
    if len(ratios) != 3 or abs(sum(ratios) - 1.0) > 1e-9:
        raise ValueError(f"ratios must be three values summing to 1, got {tuple(ratios)}")
    if any(r < 0 for r in ratios):
        raise ValueError("ratios must be non-negative")
    pool = sorted(set(speakers))
    n = len(pool)
    if n < 3:
        raise ValueError(f"need at least 3 speakers, got {n}")
    n_valid = max(1, math.floor(n * ratios[1] + 0.5))
    n_test = max(1, math.floor(n * ratios[2] + 0.5))
    if n_valid + n_test >= n:
        n_valid, n_test = 1, 1
    random.Random(seed).shuffle(pool)
    return SpeakerSplit(
        train=frozenset(pool[n_valid + n_test:]),
        valid=frozenset(pool[:n_valid]),
        test=frozenset(pool[n_valid:n_valid + n_test]),
        seed=seed,
    )


def sample_validation(
    utterance_ids: Sequence[str], fraction: float = 0.1, seed: int = 0
) -> tuple[list[str], list[str]]:
    """Hold out `fraction` of training utterances (TIMIT has no validation set)."""
    pool = sorted(set(utterance_ids))
    n_valid = math.floor(len(pool) * fraction + 0.5)
    valid = set(random.Random(seed).sample(pool, n_valid))
    return [u for u in pool if u not in valid], sorted(valid)


# --- directory ingestion ---------------------------------------------------

def load_timit_dir(root: Path, sample_rate: int = 16000) -> list[UtteranceAnnotation]:
    """Read every .phn file under `root` (TRAIN/DR1/FCJF0/SA1.PHN layout).

    Utterance ids are ``<speaker>_<stem>``; a TRAIN or TEST path component is
    kept as a prefix so the standard split survives in the id.
    """
    anns = []
    for path in sorted(p for p in Path(root).rglob("*") if p.suffix.lower() == ".phn"):
        speaker = path.parent.name.lower()
        part = next((q.lower() for q in path.parts if q.lower() in ("train", "test")), "")
        uid = f"{speaker}_{path.stem.lower()}"
        if part:
            uid = f"{part}_{uid}"
        anns.append(parse_timit_phn(path.read_text(), sample_rate, uid, speaker))
    return anns


_BUCKEYE_SPK = re.compile(r"^(s\d{2})", re.I)


def load_buckeye_dir(root: Path) -> list[UtteranceAnnotation]:
    anns = []
    for path in sorted(Path(root).rglob("*.phones")):
        m = _BUCKEYE_SPK.match(path.stem)
        speaker = m.group(1).lower() if m else path.parent.name
        anns.append(parse_buckeye_phones(path.read_text(errors="replace"), path.stem, speaker))
    return anns


def timit_split(utterance_ids: Sequence[str], seed: int = 0, valid_fraction: float = 0.1) -> dict:
    """Standard train/test partition from the id prefix, plus a sampled validation set."""
    train = [u for u in utterance_ids if u.startswith("train_")]
    test = sorted(u for u in utterance_ids if u.startswith("test_"))
    train, valid = sample_validation(train, valid_fraction, seed)
    return {"seed": seed, "train": train, "valid": valid, "test": test}
