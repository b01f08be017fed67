"""Descriptive per-class statistics: the numbers behind the comparison plots."""

from __future__ import annotations

import csv
import io
import math
from typing import Iterable, Mapping, Sequence

import numpy as np

REPORT_METRICS = ("cr", "tr", "ts", "te", "arr", "lad_days", "lad_log", "votes", "rep_log")
CLASSES = ("Unresolved", "Resolved")
N_BINS = 10
# metrics with a known range get fixed bin edges; others span the pooled data
FIXED_RANGES = {"arr": (0.0, 1.0), "cr": (0.0, 1.0), "ts": (0.0, 1.0)}


def _values(records: Sequence[Mapping], metric: str, label: str) -> np.ndarray:
    out = []
    for r in records:
        if r["label"] != label:
            continue
        v = r[metric]
        v = math.nan if v in ("", None) else float(v)
        if not math.isnan(v):
            out.append(v)
    return np.array(out, dtype=np.float64)


def bin_edges(metric: str, pooled: np.ndarray, n_bins: int = N_BINS) -> np.ndarray:
    if metric in FIXED_RANGES:
        lo, hi = FIXED_RANGES[metric]
    elif len(pooled):
        lo, hi = float(pooled.min()), float(pooled.max())
    else:
        lo, hi = 0.0, 1.0
    if hi <= lo:
        hi = lo + 1.0
    return np.linspace(lo, hi, n_bins + 1)


def five_point(values: np.ndarray) -> dict[str, float]:
    if not len(values):
        return {k: math.nan for k in ("min", "q1", "median", "q3", "max")}
    q = np.percentile(values, [0, 25, 50, 75, 100])
    return dict(zip(("min", "q1", "median", "q3", "max"), map(float, q)))


def describe(records: Sequence[Mapping], metrics: Iterable[str] = REPORT_METRICS):
    """Summary rows and histogram rows for each metric and class."""
    summary, histograms = [], []
    for metric in metrics:
        per_class = {c: _values(records, metric, c) for c in CLASSES}
        edges = bin_edges(metric, np.concatenate(list(per_class.values())))
        for c, vals in per_class.items():
            row = {"metric": metric, "class": c, "n": len(vals),
                   "mean": float(vals.mean()) if len(vals) else math.nan}
            row.update(five_point(vals))
            summary.append(row)
            # values outside a fixed range are clipped into the end bins
            counts, _ = np.histogram(np.clip(vals, edges[0], edges[-1]), bins=edges)
            for b, count in enumerate(counts):
                histograms.append({
                    "metric": metric, "class": c, "bin": b,
                    "lower": float(edges[b]), "upper": float(edges[b + 1]),
                    "count": int(count),
                })
    return summary, histograms


def to_csv(rows: Sequence[Mapping]) -> str:
    buf = io.StringIO()
    if rows:
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        for r in rows:
            writer.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()})
    return buf.getvalue()
