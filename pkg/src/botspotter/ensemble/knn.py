"""k-nearest neighbours, euclidean distance, uniform vote."""
from __future__ import annotations

import numpy as np


class KNearestNeighbors:
    def __init__(self, n_neighbors: int = 5):
        self.n_neighbors = n_neighbors

    def fit(self, X: np.ndarray, y: np.ndarray, n_classes: int) -> "KNearestNeighbors":
        self.X = np.asarray(X, dtype=float)
        self.y = np.asarray(y)
        self.n_classes = n_classes
        return self

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        k = min(self.n_neighbors, len(self.X))
        d2 = (
            (X ** 2).sum(axis=1)[:, None] - 2.0 * X @ self.X.T + (self.X ** 2).sum(axis=1)[None, :]
        )
        # stable sort: equal distances resolve by training order
        nn = np.argsort(np.maximum(d2, 0.0), axis=1, kind="stable")[:, :k]
        votes = np.zeros((len(X), self.n_classes))
        np.add.at(votes, (np.repeat(np.arange(len(X)), k), self.y[nn].ravel()), 1.0)
        return votes / k
