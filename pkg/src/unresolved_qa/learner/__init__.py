"""Classifiers and cross-validation for unresolved-question prediction."""

from .evaluation import (
    ALGORITHMS,
    DISPLAY_NAMES,
    EvaluationReport,
    FittedPipeline,
    cross_validate,
    make_model,
    predict,
    stratified_folds,
    train_logistic,
    train_nb,
    train_tree,
)
from .features import (
    CSV_COLUMNS,
    RESOLVED,
    UNRESOLVED,
    FeatureMatrix,
    FeatureSet,
    LearnerError,
    MeanImputer,
    assemble,
    read_feature_csv,
    write_feature_csv,
)
from .logistic import LogisticRegression
from .naive_bayes import GaussianNaiveBayes
from .tree import DecisionTree

__all__ = [
    "ALGORITHMS",
    "CSV_COLUMNS",
    "DISPLAY_NAMES",
    "DecisionTree",
    "EvaluationReport",
    "FeatureMatrix",
    "FeatureSet",
    "FittedPipeline",
    "GaussianNaiveBayes",
    "LearnerError",
    "LogisticRegression",
    "MeanImputer",
    "RESOLVED",
    "UNRESOLVED",
    "assemble",
    "cross_validate",
    "make_model",
    "predict",
    "read_feature_csv",
    "stratified_folds",
    "train_logistic",
    "train_nb",
    "train_tree",
    "write_feature_csv",
]
