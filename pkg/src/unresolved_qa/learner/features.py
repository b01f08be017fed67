"""Feature matrices, feature sets and the model-input CSV."""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

UNRESOLVED = 1
RESOLVED = 0
LABEL_NAMES = {UNRESOLVED: "Unresolved", RESOLVED: "Resolved"}
LABEL_CODES = {v: k for k, v in LABEL_NAMES.items()}

CSV_COLUMNS = ("question_id", "te", "arr", "lad_log", "votes", "rep_log", "label")


class LearnerError(ValueError):
    pass


class FeatureSet(enum.Enum):
    FULL = ("te", "arr", "lad_log", "votes", "rep_log")
    REDUCED = ("arr", "lad_log", "votes")

    @property
    def columns(self) -> tuple[str, ...]:
        return self.value

    @property
    def label(self) -> str:
        short = {"te": "TE", "arr": "ARR", "lad_log": "LAD", "votes": "V", "rep_log": "R"}
        return "{" + ", ".join(short[c] for c in self.columns) + "}"

    @classmethod
    def parse(cls, name: str) -> "FeatureSet":
        try:
            return cls[name.upper()]
        except KeyError:
            raise LearnerError(f"unknown feature set {name!r}") from None


@dataclass(frozen=True)
class FeatureMatrix:
    ids: np.ndarray
    X: np.ndarray
    y: np.ndarray
    feature_names: tuple[str, ...]

    def __post_init__(self):
        if self.X.shape != (len(self.ids), len(self.feature_names)):
            raise LearnerError(
                f"matrix shape {self.X.shape} does not match {len(self.ids)} rows x "
                f"{len(self.feature_names)} features"
            )
        if self.y.shape != (len(self.ids),):
            raise LearnerError("label vector length mismatch")

    def __len__(self) -> int:
        return len(self.ids)

    def subset(self, rows) -> "FeatureMatrix":
        return FeatureMatrix(self.ids[rows], self.X[rows], self.y[rows], self.feature_names)


def _to_float(value) -> float:
    if value is None or value == "":
        return math.nan
    return float(value)


def assemble(records: Iterable[Mapping], feature_set: FeatureSet) -> FeatureMatrix:
    """Rows ordered by question id; missing values stay NaN until fold-level imputation."""
    rows = sorted(records, key=lambda r: int(r["question_id"]))
    if not rows:
        raise LearnerError("no questions to learn from")
    cols = feature_set.columns
    ids = np.array([int(r["question_id"]) for r in rows], dtype=np.int64)
    X = np.array([[_to_float(r[c]) for c in cols] for r in rows], dtype=np.float64)
    y = np.array([LABEL_CODES[r["label"]] for r in rows], dtype=np.int64)
    if len(np.unique(y)) < 2:
        raise LearnerError("only one class present; both resolved and unresolved questions are needed")
    if np.isinf(X).any():
        raise LearnerError("non-finite feature value")
    return FeatureMatrix(ids, X, y, cols)


class MeanImputer:
    """Column means of the training rows, used to fill NaNs."""

    def __init__(self, means: Sequence[float] = ()):
        self.means = np.asarray(means, dtype=np.float64)

    def fit(self, X: np.ndarray) -> "MeanImputer":
        means = np.zeros(X.shape[1])
        for j in range(X.shape[1]):
            col = X[:, j]
            ok = ~np.isnan(col)
            means[j] = col[ok].mean() if ok.any() else 0.0
        self.means = means
        return self

    def transform(self, X: np.ndarray) -> np.ndarray:
        if X.shape[1] != len(self.means):
            raise LearnerError("imputer fitted on a different number of features")
        return np.where(np.isnan(X), self.means, X)


def format_value(v: float) -> str:
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return ""
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def write_feature_csv(records: Iterable[Mapping], columns: Sequence[str] = CSV_COLUMNS) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for r in records:
        writer.writerow([r[c] if isinstance(r[c], str) else format_value(r[c]) for c in columns])
    return buf.getvalue()


def read_feature_csv(text: str, required: Sequence[str] = ("question_id", "label")) -> list[dict]:
    reader = csv.DictReader(io.StringIO(text))
    missing = [c for c in required if c not in (reader.fieldnames or ())]
    if missing:
        raise LearnerError(f"feature file lacks columns {missing}")
    return list(reader)
