"""Stratified k-fold cross-validation with per-fold imputation."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .features import LABEL_NAMES, UNRESOLVED, FeatureMatrix, LearnerError, MeanImputer
from .logistic import LogisticRegression
from .naive_bayes import GaussianNaiveBayes
from .tree import DecisionTree

ALGORITHMS = {
    "tree": DecisionTree,
    "logistic": LogisticRegression,
    "nb": GaussianNaiveBayes,
}
DISPLAY_NAMES = {"tree": "Decision tree (C4.5)", "logistic": "Logistic Regression", "nb": "Naive Bayes"}
MODEL_FORMAT = "unresolved-qa-classifier/1"

Model = Union[DecisionTree, LogisticRegression, GaussianNaiveBayes]


def make_model(algorithm: str, params: Optional[dict] = None) -> Model:
    try:
        cls = ALGORITHMS[algorithm]
    except KeyError:
        raise LearnerError(f"unknown algorithm {algorithm!r}") from None
    return cls(**(params or {}))


def train_tree(matrix: FeatureMatrix, min_leaf: int = 2, max_depth: int = 25) -> DecisionTree:
    return DecisionTree(min_leaf, max_depth).fit(matrix.X, matrix.y)


def train_logistic(matrix: FeatureMatrix, l2=1e-8, tol=1e-8, max_iter=500) -> LogisticRegression:
    return LogisticRegression(l2, tol, max_iter).fit(matrix.X, matrix.y)


def train_nb(matrix: FeatureMatrix, variance_floor: float = 1e-9) -> GaussianNaiveBayes:
    return GaussianNaiveBayes(variance_floor).fit(matrix.X, matrix.y)


@dataclass
class FittedPipeline:
    """Imputer plus classifier, fitted on the same training rows."""

    algorithm: str
    feature_names: tuple[str, ...]
    imputer: MeanImputer
    model: Model

    @classmethod
    def fit(cls, algorithm: str, matrix: FeatureMatrix, params: Optional[dict] = None):
        imputer = MeanImputer().fit(matrix.X)
        model = make_model(algorithm, params).fit(imputer.transform(matrix.X), matrix.y)
        return cls(algorithm, matrix.feature_names, imputer, model)

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        return np.clip(self.model.predict_proba(self.imputer.transform(np.asarray(X, float))), 0.0, 1.0)

    def predict(self, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Labels (1 = unresolved) and unresolved-class probabilities.

        An exact 0.5 goes to the unresolved class.
        """
        p = self.predict_proba(X)
        return np.where(p >= 0.5, UNRESOLVED, 1 - UNRESOLVED), p

    def to_json(self) -> str:
        return json.dumps(
            {
                "format": MODEL_FORMAT,
                "algorithm": self.algorithm,
                "feature_names": list(self.feature_names),
                "impute_means": [float(v) for v in self.imputer.means],
                "params": self.model.params(),
            },
            sort_keys=True,
            indent=1,
        )

    @classmethod
    def from_json(cls, text: str) -> "FittedPipeline":
        d = json.loads(text)
        if d.get("format") != MODEL_FORMAT:
            raise LearnerError("not a classifier model file")
        model = ALGORITHMS[d["algorithm"]].from_params(d["params"])
        return cls(d["algorithm"], tuple(d["feature_names"]), MeanImputer(d["impute_means"]), model)


def predict(model: Union[FittedPipeline, Model], row) -> tuple[str, float]:
    """Label name and unresolved-class probability for one feature row."""
    X = np.asarray(row, dtype=np.float64).reshape(1, -1)
    p = float(np.clip(model.predict_proba(X)[0], 0.0, 1.0))
    return LABEL_NAMES[UNRESOLVED if p >= 0.5 else 1 - UNRESOLVED], p


def stratified_folds(y, k: int = 10, seed: int = 0) -> np.ndarray:
    """Fold index per row.

    Each class is shuffled with the seeded generator and dealt round-robin;
    the dealing position carries over from one class to the next so total
    fold sizes also differ by at most one.
    """
    y = np.asarray(y.y if isinstance(y, FeatureMatrix) else y)
    if k < 2:
        raise LearnerError("need at least 2 folds")
    rng = np.random.default_rng(seed)
    folds = np.empty(len(y), dtype=np.int64)
    offset = 0
    for c in np.unique(y):
        members = np.flatnonzero(y == c)
        members = members[rng.permutation(len(members))]
        folds[members] = (offset + np.arange(len(members))) % k
        offset = (offset + len(members)) % k
    return folds


@dataclass
class EvaluationReport:
    algorithm: str
    feature_names: tuple[str, ...]
    tp: int
    fp: int
    fn: int
    tn: int
    seed: int
    folds: int
    config: dict = field(default_factory=dict)
    fold_models: list = field(default_factory=list, repr=False, compare=False)

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    @property
    def accuracy(self) -> float:
        return (self.tp + self.tn) / self.total

    @property
    def precision(self) -> Optional[float]:
        return self.tp / (self.tp + self.fp) if self.tp + self.fp else None

    @property
    def recall(self) -> Optional[float]:
        return self.tp / (self.tp + self.fn) if self.tp + self.fn else None

    def to_dict(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "feature_names": list(self.feature_names),
            "confusion": {"tp": self.tp, "fp": self.fp, "fn": self.fn, "tn": self.tn},
            "accuracy": self.accuracy,
            "precision_unresolved": self.precision,
            "recall_unresolved": self.recall,
            "seed": self.seed,
            "folds": self.folds,
            "config": self.config,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def cross_validate(
    algorithm: str,
    matrix: FeatureMatrix,
    k: int = 10,
    seed: int = 0,
    params: Optional[dict] = None,
    keep_models: bool = False,
) -> EvaluationReport:
    """Pooled confusion matrix over ``k`` stratified folds.

    Imputation means, scaling and the model itself are fitted on the training
    rows of each fold only. Unresolved is the positive class.
    """
    folds = stratified_folds(matrix.y, k, seed)
    tp = fp = fn = tn = 0
    kept = []
    for f in range(k):
        test = folds == f
        if not test.any():
            continue
        train = matrix.subset(~test)
        if len(np.unique(train.y)) < 2:
            raise LearnerError(
                f"fold {f}: training rows hold a single class; use a larger dataset or fewer folds"
            )
        pipe = FittedPipeline.fit(algorithm, train, params)
        pred, _ = pipe.predict(matrix.X[test])
        truth = matrix.y[test]
        tp += int(np.sum((pred == UNRESOLVED) & (truth == UNRESOLVED)))
        fp += int(np.sum((pred == UNRESOLVED) & (truth != UNRESOLVED)))
        fn += int(np.sum((pred != UNRESOLVED) & (truth == UNRESOLVED)))
        tn += int(np.sum((pred != UNRESOLVED) & (truth != UNRESOLVED)))
        if keep_models:
            kept.append(pipe)
    return EvaluationReport(
        algorithm=algorithm,
        feature_names=matrix.feature_names,
        tp=tp,
        fp=fp,
        fn=fn,
        tn=tn,
        seed=seed,
        folds=k,
        config=dict(params or {}),
        fold_models=kept,
    )
