"""One-hidden-layer ReLU perceptron with softmax output, trained by Adam."""
from __future__ import annotations

import numpy as np


class MLPClassifier:
    def __init__(self, hidden: int = 100, learning_rate: float = 1e-3, epochs: int = 200,
                 batch_size: int | None = None, l2: float = 1e-4, seed: int = 0,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.hidden = hidden
        self.learning_rate = learning_rate
        self.epochs = epochs
        self.batch_size = batch_size
        self.l2 = l2
        self.seed = seed
        self.beta1, self.beta2, self.eps = beta1, beta2, eps

    def _init(self, rng, d, k):
        def glorot(fan_in, fan_out):
            bound = np.sqrt(6.0 / (fan_in + fan_out))
            return rng.uniform(-bound, bound, (fan_in, fan_out)), rng.uniform(-bound, bound, fan_out)

        W1, b1 = glorot(d, self.hidden)
        W2, b2 = glorot(self.hidden, k)
        return [W1, b1, W2, b2]

    def _forward(self, X, params):
        W1, b1, W2, b2 = params
        h = np.maximum(X @ W1 + b1, 0.0)
        z = h @ W2 + b2
        z -= z.max(axis=1, keepdims=True)
        p = np.exp(z)
        p /= p.sum(axis=1, keepdims=True)
        return h, p

    def fit(self, X: np.ndarray, y: np.ndarray, n_classes: int) -> "MLPClassifier":
        rng = np.random.default_rng(self.seed)
        n, d = X.shape
        self.n_classes = n_classes
        params = self._init(rng, d, n_classes)
        m = [np.zeros_like(p) for p in params]
        v = [np.zeros_like(p) for p in params]
        Y = np.zeros((n, n_classes))
        Y[np.arange(n), y] = 1.0
        bs = n if self.batch_size is None else min(self.batch_size, n)
        step = 0
        self.loss_curve = []
        for _ in range(self.epochs):
            order = rng.permutation(n) if bs < n else np.arange(n)
            epoch_loss = 0.0
            for start in range(0, n, bs):
                idx = order[start:start + bs]
                Xb, Yb = X[idx], Y[idx]
                h, p = self._forward(Xb, params)
                W1, _, W2, _ = params
                epoch_loss += -np.sum(Yb * np.log(np.clip(p, 1e-12, None)))
                dz = (p - Yb) / len(idx)
                gW2 = h.T @ dz + self.l2 * W2 / len(idx)
                gb2 = dz.sum(axis=0)
                dh = (dz @ W2.T) * (h > 0)
                gW1 = Xb.T @ dh + self.l2 * W1 / len(idx)
                gb1 = dh.sum(axis=0)
                step += 1
                lr = self.learning_rate * np.sqrt(1 - self.beta2**step) / (1 - self.beta1**step)
                for i, g in enumerate((gW1, gb1, gW2, gb2)):
                    m[i] = self.beta1 * m[i] + (1 - self.beta1) * g
                    v[i] = self.beta2 * v[i] + (1 - self.beta2) * g * g
                    params[i] = params[i] - lr * m[i] / (np.sqrt(v[i]) + self.eps)
            self.loss_curve.append(epoch_loss / n)
        self.params = params
        return self

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        return self._forward(X, self.params)[1]
