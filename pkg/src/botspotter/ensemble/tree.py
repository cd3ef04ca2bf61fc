"""Weighted CART classification tree (gini), vectorized split search."""
from __future__ import annotations

import numpy as np


class DecisionTree:
    """Binary tree over integer labels 0..n_classes-1 with per-leaf class distributions.

    `max_features` restricts each split to a random feature subset (forest mode);
    `min_samples_split` stops splitting smaller nodes.
    """

    def __init__(self, n_classes: int, max_depth: int | None = None, min_samples_split: int = 2,
                 max_features: int | None = None, rng: np.random.Generator | None = None):
        self.n_classes = n_classes
        self.max_depth = max_depth
        self.min_samples_split = max(2, min_samples_split)
        self.max_features = max_features
        self.rng = rng or np.random.default_rng(0)

    def fit(self, X: np.ndarray, y: np.ndarray, sample_weight: np.ndarray | None = None,
            presorted: np.ndarray | None = None) -> "DecisionTree":
        """`presorted` is `argsort(X, axis=0)`, reusable when refitting on the same X."""
        n, d = X.shape
        w = np.ones(n) if sample_weight is None else np.asarray(sample_weight, dtype=float)
        onehot = np.zeros((n, self.n_classes))
        onehot[np.arange(n), y] = 1.0
        self._feature: list[int] = []
        self._threshold: list[float] = []
        self._left: list[int] = []
        self._right: list[int] = []
        self._value: list[np.ndarray] = []
        self._X, self._Yw, self._d = X, onehot * w[:, None], d
        self._YwT = np.ascontiguousarray(self._Yw.T)
        self._order = np.argsort(X, axis=0, kind="stable") if presorted is None else presorted
        self._grow(np.arange(n), 0)
        del self._X, self._Yw, self._YwT, self._order
        self.feature = np.array(self._feature, dtype=np.int64)
        self.threshold = np.array(self._threshold)
        self.left = np.array(self._left, dtype=np.int64)
        self.right = np.array(self._right, dtype=np.int64)
        self.value = np.vstack(self._value)
        return self

    def _new_node(self, counts: np.ndarray) -> int:
        total = counts.sum()
        dist = counts / total if total > 0 else np.full(self.n_classes, 1.0 / self.n_classes)
        self._feature.append(-1)
        self._threshold.append(0.0)
        self._left.append(-1)
        self._right.append(-1)
        self._value.append(dist)
        return len(self._value) - 1

    def _grow(self, idx: np.ndarray, depth: int) -> int:
        counts = self._Yw[idx].sum(axis=0)
        node = self._new_node(counts)
        if (
            len(idx) < self.min_samples_split
            or (self.max_depth is not None and depth >= self.max_depth)
            or np.count_nonzero(counts > 0) <= 1
        ):
            return node
        split = self._best_split(idx)
        if split is None:
            return node
        f, thr = split
        go_left = self._X[idx, f] <= thr
        self._feature[node] = f
        self._threshold[node] = thr
        self._left[node] = self._grow(idx[go_left], depth + 1)
        self._right[node] = self._grow(idx[~go_left], depth + 1)
        return node

    def _best_split(self, idx: np.ndarray) -> tuple[int, float] | None:
        if self.max_features is not None and self.max_features < self._d:
            feats = np.sort(self.rng.choice(self._d, self.max_features, replace=False))
        else:
            feats = np.arange(self._d)
        m = len(idx)
        # node rows in per-feature sorted order, filtered from the fit-time presort
        cols = self._order[:, feats].T                         # (f, n)
        member = np.zeros(len(self._X), dtype=bool)
        member[idx] = True
        order = cols[member[cols]].reshape(len(feats), m).T    # (m, f)
        xs = self._X[order, feats[None, :]]
        Yw = self._YwT[:, order]                               # (k, m, f)
        left = np.cumsum(Yw, axis=1)[:, :-1]                   # split after row r
        total = Yw.sum(axis=1)                                 # (k, f)
        w_all = total.sum(axis=0)
        t2 = (total * total).sum(axis=0)
        wl = left.sum(axis=0)
        wr = w_all[None, :] - wl
        l2 = np.einsum("kmf,kmf->mf", left, left)
        # sum_k right_k^2 expanded so the right-hand counts are never materialized
        r2 = t2[None, :] - 2.0 * np.einsum("kf,kmf->mf", total, left) + l2
        with np.errstate(divide="ignore", invalid="ignore"):
            score = l2 / wl + r2 / wr
        valid = (xs[1:] > xs[:-1]) & (wl > 0) & (wr > 0)
        score = np.where(valid, score, -np.inf)
        if not np.isfinite(score).any():
            return None
        parent = t2 / w_all
        r, c = np.unravel_index(np.argmax(score), score.shape)
        if score[r, c] < parent[c] - 1e-12:
            return None
        thr = (xs[r, c] + xs[r + 1, c]) / 2.0
        if thr >= xs[r + 1, c]:  # adjacent floats
            thr = xs[r, c]
        return int(feats[c]), float(thr)

    def apply(self, X: np.ndarray) -> np.ndarray:
        node = np.zeros(len(X), dtype=np.int64)
        active = self.feature[node] >= 0
        while active.any():
            rows = np.nonzero(active)[0]
            cur = node[rows]
            go_left = X[rows, self.feature[cur]] <= self.threshold[cur]
            node[rows] = np.where(go_left, self.left[cur], self.right[cur])
            active = self.feature[node] >= 0
        return node

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        return self.value[self.apply(X)]
