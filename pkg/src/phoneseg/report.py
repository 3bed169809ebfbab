"""Rendering of evaluation results: results-table rows, JSON and CSV."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict
from typing import Mapping, Sequence

from .metrics import CorpusReport, MatchConfig, MetricsReport

# column order of the published results tables; * marks the strict scheme
TABLE_COLUMNS = (
    ("Precision", "lenient", "precision"),
    ("Precision*", "strict", "precision"),
    ("Recall", "lenient", "recall"),
    ("Recall*", "strict", "recall"),
    ("F1", "lenient", "f1"),
    ("F1*", "strict", "f1"),
    ("R-Value", "lenient", "r_value"),
    ("R-Value*", "strict", "r_value"),
)


def columns_for(schemes: Sequence[str]) -> list[tuple[str, str, str]]:
    return [c for c in TABLE_COLUMNS if c[1] in schemes]


def table_row(reports: Mapping[str, MetricsReport]) -> dict[str, float]:
    """Unrounded ratios keyed by column name, in table order."""
    return {name: getattr(reports[s], attr) for name, s, attr in columns_for(list(reports))}


def render_table(rows: Mapping[str, Mapping[str, MetricsReport]]) -> str:
    """Fixed-width table, one line per labelled row, values as percentages."""
    first = next(iter(rows.values()))
    cols = columns_for(list(first))
    label_w = max([len("Model")] + [len(k) for k in rows])
    widths = [max(len(name), 6) for name, _, _ in cols]
    out = ["  ".join([f"{'Model':<{label_w}}"] + [f"{n:>{w}}" for (n, _, _), w in zip(cols, widths)])]
    for label, reports in rows.items():
        vals = [f"{100 * getattr(reports[s], a):.2f}" for _, s, a in cols]
        out.append("  ".join([f"{label:<{label_w}}"] + [f"{v:>{w}}" for v, w in zip(vals, widths)]))
    return "\n".join(out) + "\n"


def corpus_to_json(results: Mapping[str, CorpusReport], cfg: MatchConfig) -> dict:
    """Full machine-readable result for one evaluation (all schemes run)."""
    cfg_d = asdict(cfg)
    cfg_d.pop("scheme")
    return {
        "config": dict(cfg_d, schemes=sorted(results)),
        "row": table_row({s: r.overall for s, r in results.items()}),
        "schemes": {
            s: {
                "overall": r.overall.as_dict(),
                "per_utterance": {u: m.as_dict() for u, m in sorted(r.per_utterance.items())},
            }
            for s, r in sorted(results.items())
        },
    }


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def reports_from_json(d: dict) -> dict[str, MetricsReport]:
    return {s: MetricsReport.from_dict(v["overall"]) for s, v in d["schemes"].items()}


def render_csv(rows: Sequence[tuple[object, Mapping[str, MetricsReport]]], key: str = "tolerance_sec") -> str:
    """One line per (key, reports); ratios unrounded."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    cols = columns_for(list(rows[0][1]))
    w.writerow([key] + [n for n, _, _ in cols] + ["OS"])
    for tol, reports in rows:
        any_report = next(iter(reports.values()))
        w.writerow(
            [repr(tol) if isinstance(tol, float) else tol] + [repr(getattr(reports[s], a)) for _, s, a in cols] + [repr(any_report.os)]
        )
    return buf.getvalue()
