"""C4.5-style decision tree on numeric features.

Binary splits at midpoints between consecutive distinct values. Within a
feature the threshold with the largest information gain is kept; across
features the split with the largest gain ratio wins, among those whose gain
is at least the average candidate gain. No post-pruning.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .features import UNRESOLVED


def _entropy2(pos, n):
    """Binary entropy in bits of ``pos`` positives among ``n``, elementwise."""
    pos = np.asarray(pos, dtype=np.float64)
    n = np.asarray(n, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        p = np.where(n > 0, pos / n, 0.0)
        q = 1.0 - p
        h = -(np.where(p > 0, p * np.log2(p), 0.0) + np.where(q > 0, q * np.log2(q), 0.0))
    return h


@dataclass
class _Candidate:
    feature: int
    threshold: float
    gain: float
    ratio: float


def _best_threshold(x: np.ndarray, y: np.ndarray, min_leaf: int, parent_h: float):
    order = np.argsort(x, kind="stable")
    xs = x[order]
    ys = y[order]
    n = len(xs)
    cum_pos = np.cumsum(ys)
    total_pos = cum_pos[-1]
    # split after position i: left = [0..i], right = [i+1..n-1]
    i = np.arange(n - 1)
    n_left = i + 1
    n_right = n - n_left
    valid = (xs[:-1] < xs[1:]) & (n_left >= min_leaf) & (n_right >= min_leaf)
    if not valid.any():
        return None
    i = i[valid]
    n_left = n_left[valid]
    n_right = n_right[valid]
    pos_left = cum_pos[i]
    pos_right = total_pos - pos_left
    child_h = (n_left * _entropy2(pos_left, n_left) + n_right * _entropy2(pos_right, n_right)) / n
    gains = parent_h - child_h
    best = int(np.argmax(gains))
    gain = float(gains[best])
    split_info = float(_entropy2(n_left[best], n))
    lo, hi = xs[i[best]], xs[i[best] + 1]
    threshold = (lo + hi) / 2.0
    if not lo <= threshold < hi:
        threshold = lo
    return threshold, gain, gain / split_info if split_info > 0 else 0.0


class DecisionTree:
    name = "tree"

    def __init__(self, min_leaf: int = 2, max_depth: int = 25):
        self.min_leaf = min_leaf
        self.max_depth = max_depth
        self.feature: list[int] = []
        self.threshold: list[float] = []
        self.left: list[int] = []
        self.right: list[int] = []
        self.n_pos: list[int] = []
        self.n: list[int] = []

    # node storage: feature == -1 marks a leaf
    def _add_node(self, n_pos: int, n: int) -> int:
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.n_pos.append(int(n_pos))
        self.n.append(int(n))
        return len(self.feature) - 1

    def fit(self, X: np.ndarray, y: np.ndarray) -> "DecisionTree":
        X = np.asarray(X, dtype=np.float64)
        y = (np.asarray(y) == UNRESOLVED).astype(np.int64)
        self.__init__(self.min_leaf, self.max_depth)
        self._grow(X, y, np.arange(len(y)), depth=0)
        return self

    def _choose(self, X, y, rows):
        n = len(rows)
        parent_h = float(_entropy2(y[rows].sum(), n))
        cands = []
        for f in range(X.shape[1]):
            found = _best_threshold(X[rows, f], y[rows], self.min_leaf, parent_h)
            if found is None:
                continue
            thr, gain, ratio = found
            if gain > 1e-12:
                cands.append(_Candidate(f, thr, gain, ratio))
        if not cands:
            return None
        avg_gain = sum(c.gain for c in cands) / len(cands)
        eligible = [c for c in cands if c.gain >= avg_gain - 1e-12]
        return max(eligible, key=lambda c: (c.ratio, -c.feature))

    def _grow(self, X, y, rows, depth):
        n_pos = int(y[rows].sum())
        node = self._add_node(n_pos, len(rows))
        if n_pos in (0, len(rows)) or depth >= self.max_depth or len(rows) < 2 * self.min_leaf:
            return node
        split = self._choose(X, y, rows)
        if split is None:
            return node
        go_left = X[rows, split.feature] <= split.threshold
        self.feature[node] = split.feature
        self.threshold[node] = split.threshold
        self.left[node] = self._grow(X, y, rows[go_left], depth + 1)
        self.right[node] = self._grow(X, y, rows[~go_left], depth + 1)
        return node

    def _leaf(self, x) -> int:
        node = 0
        while self.feature[node] != -1:
            node = self.left[node] if x[self.feature[node]] <= self.threshold[node] else self.right[node]
        return node

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        """Laplace-smoothed probability of the unresolved class."""
        X = np.asarray(X, dtype=np.float64)
        out = np.empty(len(X))
        for r, x in enumerate(X):
            leaf = self._leaf(x)
            out[r] = (self.n_pos[leaf] + 1.0) / (self.n[leaf] + 2.0)
        return out

    @property
    def depth(self) -> int:
        def walk(node):
            if self.feature[node] == -1:
                return 0
            return 1 + max(walk(self.left[node]), walk(self.right[node]))

        return walk(0) if self.feature else 0

    def params(self) -> dict:
        return {
            "min_leaf": self.min_leaf,
            "max_depth": self.max_depth,
            "feature": list(self.feature),
            "threshold": [float(t) for t in self.threshold],
            "left": list(self.left),
            "right": list(self.right),
            "n_pos": list(self.n_pos),
            "n": list(self.n),
        }

    @classmethod
    def from_params(cls, p: dict) -> "DecisionTree":
        tree = cls(p["min_leaf"], p["max_depth"])
        for key in ("feature", "threshold", "left", "right", "n_pos", "n"):
            setattr(tree, key, list(p[key]))
        return tree
