"""L2-regularized logistic regression fitted by Newton's method."""

from __future__ import annotations

import logging

import numpy as np

from .features import UNRESOLVED, LearnerError

LOGGER = logging.getLogger(__name__)


def _log1pexp(s):
    return np.logaddexp(0.0, s)


def _sigmoid(s):
    return np.exp(-np.logaddexp(0.0, -s))


def objective(theta: np.ndarray, Z: np.ndarray, y: np.ndarray, l2: float) -> float:
    """Negative log-likelihood plus ``l2/2 * |w|^2``; ``theta = [bias, w...]``."""
    s = theta[0] + Z @ theta[1:]
    return float(np.sum(_log1pexp(s) - y * s) + 0.5 * l2 * theta[1:] @ theta[1:])


def gradient(theta: np.ndarray, Z: np.ndarray, y: np.ndarray, l2: float) -> np.ndarray:
    s = theta[0] + Z @ theta[1:]
    r = _sigmoid(s) - y
    g = np.empty_like(theta)
    g[0] = r.sum()
    g[1:] = Z.T @ r + l2 * theta[1:]
    return g


class LogisticRegression:
    name = "logistic"

    def __init__(self, l2: float = 1e-8, tol: float = 1e-8, max_iter: int = 500):
        self.l2 = l2
        self.tol = tol
        self.max_iter = max_iter
        self.mean = np.zeros(0)
        self.scale = np.ones(0)
        self.theta = np.zeros(1)
        self.converged = False
        self.n_iter = 0

    @property
    def bias(self) -> float:
        return float(self.theta[0])

    @property
    def weights(self) -> np.ndarray:
        return self.theta[1:]

    def standardize(self, X: np.ndarray) -> np.ndarray:
        return (np.asarray(X, dtype=np.float64) - self.mean) / self.scale

    def fit(self, X: np.ndarray, y: np.ndarray) -> "LogisticRegression":
        X = np.asarray(X, dtype=np.float64)
        if not np.isfinite(X).all():
            raise LearnerError("non-finite feature value reached logistic regression")
        y = (np.asarray(y) == UNRESOLVED).astype(np.float64)
        self.mean = X.mean(axis=0)
        scale = X.std(axis=0)
        self.scale = np.where(scale > 0, scale, 1.0)
        Z = self.standardize(X)
        n, p = Z.shape
        A = np.hstack([np.ones((n, 1)), Z])
        ridge = np.full(p + 1, self.l2)
        ridge[0] = 0.0

        theta = np.zeros(p + 1)
        f = objective(theta, Z, y, self.l2)
        self.converged = False
        for it in range(1, self.max_iter + 1):
            g = gradient(theta, Z, y, self.l2)
            mu = _sigmoid(A @ theta)
            H = (A * (mu * (1.0 - mu))[:, None]).T @ A + np.diag(ridge)
            try:
                step = np.linalg.solve(H, g)
            except np.linalg.LinAlgError:
                step = np.linalg.lstsq(H, g, rcond=None)[0]
            t = 1.0
            while True:
                cand = theta - t * step
                f_new = objective(cand, Z, y, self.l2)
                if f_new <= f + 1e-12 * abs(f) or t < 1e-10:
                    break
                t *= 0.5
            delta = np.max(np.abs(cand - theta))
            theta, f = cand, f_new
            self.n_iter = it
            if delta < self.tol:
                self.converged = True
                break
        if not self.converged:
            LOGGER.info("logistic regression stopped at max_iter=%d", self.max_iter)
        self.theta = theta
        return self

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        return _sigmoid(self.theta[0] + self.standardize(X) @ self.theta[1:])

    def params(self) -> dict:
        return {
            "l2": self.l2,
            "tol": self.tol,
            "max_iter": self.max_iter,
            "mean": [float(v) for v in self.mean],
            "scale": [float(v) for v in self.scale],
            "theta": [float(v) for v in self.theta],
            "converged": self.converged,
            "n_iter": self.n_iter,
        }

    @classmethod
    def from_params(cls, p: dict) -> "LogisticRegression":
        m = cls(p["l2"], p["tol"], p["max_iter"])
        m.mean = np.array(p["mean"], dtype=np.float64)
        m.scale = np.array(p["scale"], dtype=np.float64)
        m.theta = np.array(p["theta"], dtype=np.float64)
        m.converged = p["converged"]
        m.n_iter = p["n_iter"]
        return m
