"""Gaussian naive Bayes."""

from __future__ import annotations

import numpy as np

from .features import UNRESOLVED

# class order in the parameter arrays: index 0 = resolved, 1 = unresolved


class GaussianNaiveBayes:
    name = "nb"

    def __init__(self, variance_floor: float = 1e-9):
        self.variance_floor = variance_floor
        self.priors = np.full(2, 0.5)
        self.means = np.zeros((2, 0))
        self.variances = np.ones((2, 0))

    @classmethod
    def from_moments(cls, priors, means, variances, variance_floor: float = 1e-9):
        m = cls(variance_floor)
        m.priors = np.asarray(priors, dtype=np.float64)
        m.means = np.asarray(means, dtype=np.float64).reshape(2, -1)
        m.variances = np.maximum(
            np.asarray(variances, dtype=np.float64).reshape(2, -1), variance_floor
        )
        return m

    def fit(self, X: np.ndarray, y: np.ndarray) -> "GaussianNaiveBayes":
        X = np.asarray(X, dtype=np.float64)
        pos = np.asarray(y) == UNRESOLVED
        self.priors = np.array([(~pos).mean(), pos.mean()])
        self.means = np.vstack([X[~pos].mean(axis=0), X[pos].mean(axis=0)])
        self.variances = np.maximum(
            np.vstack([X[~pos].var(axis=0), X[pos].var(axis=0)]), self.variance_floor
        )
        return self

    def joint_log_likelihood(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        out = np.empty((len(X), 2))
        for c in range(2):
            var = self.variances[c]
            ll = -0.5 * (np.log(2.0 * np.pi * var) + (X - self.means[c]) ** 2 / var)
            out[:, c] = np.log(self.priors[c]) + ll.sum(axis=1)
        return out

    def posterior(self, X: np.ndarray) -> np.ndarray:
        """Class posteriors, columns (resolved, unresolved)."""
        jll = self.joint_log_likelihood(X)
        # logistic of the log-odds: equal likelihoods give exactly 0.5
        d = jll[:, 1] - jll[:, 0]
        p1 = np.exp(-np.logaddexp(0.0, -d))
        p0 = np.exp(-np.logaddexp(0.0, d))
        return np.column_stack([p0, p1])

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        return self.posterior(X)[:, 1]

    def params(self) -> dict:
        return {
            "variance_floor": self.variance_floor,
            "priors": self.priors.tolist(),
            "means": self.means.tolist(),
            "variances": self.variances.tolist(),
        }

    @classmethod
    def from_params(cls, p: dict) -> "GaussianNaiveBayes":
        m = cls(p["variance_floor"])
        m.priors = np.array(p["priors"], dtype=np.float64)
        m.means = np.array(p["means"], dtype=np.float64)
        m.variances = np.array(p["variances"], dtype=np.float64)
        return m
