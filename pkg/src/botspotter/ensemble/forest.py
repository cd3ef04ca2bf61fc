"""Random forest: bootstrap-aggregated CART trees with sqrt-d feature subsampling."""
from __future__ import annotations

import numpy as np

from botspotter.ensemble.tree import DecisionTree


class RandomForest:
    def __init__(self, n_trees: int = 10, min_samples_split: int = 5, max_features: str | int = "sqrt",
                 seed: int = 0):
        self.n_trees = n_trees
        self.min_samples_split = min_samples_split
        self.max_features = max_features
        self.seed = seed

    def fit(self, X: np.ndarray, y: np.ndarray, n_classes: int) -> "RandomForest":
        rng = np.random.default_rng(self.seed)
        n, d = X.shape
        m = max(1, int(np.sqrt(d))) if self.max_features == "sqrt" else int(self.max_features)
        self.n_classes = n_classes
        self.trees = []
        for _ in range(self.n_trees):
            boot = rng.integers(0, n, n)
            tree = DecisionTree(n_classes, min_samples_split=self.min_samples_split, max_features=m,
                                rng=np.random.default_rng(rng.integers(2**63)))
            self.trees.append(tree.fit(X[boot], y[boot]))
        return self

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        return np.mean([t.predict_proba(X) for t in self.trees], axis=0)
