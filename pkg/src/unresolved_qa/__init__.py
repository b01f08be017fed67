"""Metrics and classifiers for predicting unresolved Stack Overflow questions."""

__version__ = "0.1.0"
