"""Phoneme boundary evaluation under strict and lenient hit counting."""

from .core import (
    EvaluationError,
    FrameLabelSequence,
    FrameProbabilitySequence,
    InputError,
    PhonesegError,
    Segmentation,
    Timebase,
    bin_boundaries,
    frames_to_times,
)
from .metrics import (
    MatchConfig,
    MatchResult,
    MetricsReport,
    compute_metrics,
    evaluate_corpus,
    match_lenient,
    match_strict,
)

__all__ = [
    "EvaluationError",
    "FrameLabelSequence",
    "FrameProbabilitySequence",
    "InputError",
    "PhonesegError",
    "Segmentation",
    "Timebase",
    "bin_boundaries",
    "frames_to_times",
    "MatchConfig",
    "MatchResult",
    "MetricsReport",
    "compute_metrics",
    "evaluate_corpus",
    "match_lenient",
    "match_strict",
]

__version__ = "0.1.0"
