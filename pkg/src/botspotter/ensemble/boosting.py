"""Multi-class AdaBoost, SAMME.R variant (real-valued class-probability boosting)."""
from __future__ import annotations

import numpy as np

from botspotter.ensemble.tree import DecisionTree

_EPS = np.finfo(float).eps


def _samme_r_scores(proba: np.ndarray) -> np.ndarray:
    k = proba.shape[1]
    logp = np.log(np.clip(proba, _EPS, None))
    return (k - 1) * (logp - logp.mean(axis=1, keepdims=True))


class AdaBoostSAMMER:
    """Boosted shallow trees; probabilities are softmax(decision / (k - 1))."""

    def __init__(self, n_estimators: int = 50, max_depth: int = 2, learning_rate: float = 1.0, seed: int = 0):
        self.n_estimators = n_estimators
        self.max_depth = max_depth
        self.learning_rate = learning_rate
        self.seed = seed

    def fit(self, X: np.ndarray, y: np.ndarray, n_classes: int) -> "AdaBoostSAMMER":
        n = len(X)
        k = self.n_classes = n_classes
        rng = np.random.default_rng(self.seed)
        w = np.full(n, 1.0 / n)
        coding = np.full((n, k), -1.0 / (k - 1))
        coding[np.arange(n), y] = 1.0
        self.trees = []
        presorted = np.argsort(X, axis=0, kind="stable")
        for _ in range(self.n_estimators):
            tree = DecisionTree(k, max_depth=self.max_depth, rng=np.random.default_rng(rng.integers(2**63)))
            tree.fit(X, y, w, presorted)
            proba = tree.predict_proba(X)
            self.trees.append(tree)
            if np.all(proba.argmax(axis=1) == y):
                break
            logp = np.log(np.clip(proba, _EPS, None))
            w = w * np.exp(-self.learning_rate * (k - 1) / k * (coding * logp).sum(axis=1))
            total = w.sum()
            if not np.isfinite(total) or total <= 0:
                break
            w /= total
        return self

    def decision_function(self, X: np.ndarray) -> np.ndarray:
        return sum(self.learning_rate * _samme_r_scores(t.predict_proba(X)) for t in self.trees) / len(self.trees)

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        z = self.decision_function(X) / (self.n_classes - 1)
        z -= z.max(axis=1, keepdims=True)
        e = np.exp(z)
        return e / e.sum(axis=1, keepdims=True)
