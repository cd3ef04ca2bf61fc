"""RBF-kernel SVM: SMO with second-order working-set selection, one-vs-rest, Platt-scaled."""
from __future__ import annotations

import math

import numpy as np

_TAU = 1e-12


def rbf_kernel(A: np.ndarray, B: np.ndarray, gamma: float) -> np.ndarray:
    d2 = (A ** 2).sum(axis=1)[:, None] - 2.0 * A @ B.T + (B ** 2).sum(axis=1)[None, :]
    return np.exp(-gamma * np.maximum(d2, 0.0))


def smo(K: np.ndarray, y: np.ndarray, C: float, tol: float, max_iter: int) -> tuple[np.ndarray, float, int]:
    """Solve the C-SVC dual for labels y in {-1, +1} given a precomputed kernel.

    Returns (alpha, rho, iterations); the decision function is sum(alpha*y*K) - rho.
    One iteration updates one working pair. Stops when the maximal KKT violation
    falls below `tol` or after `max_iter` pair updates.
    """
    n = len(y)
    alpha = np.zeros(n)
    G = -np.ones(n)
    QD = np.diag(K).copy()
    it = 0
    while it < max_iter:
        yG = -y * G
        up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
        low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < C))
        if not up.any() or not low.any():
            break
        i = int(np.argmax(np.where(up, yG, -np.inf)))
        gmax = yG[i]
        gmin = np.min(np.where(low, yG, np.inf))
        if gmax - gmin < tol:
            break
        b = gmax - yG
        cand = low & (b > 0)
        if not cand.any():
            break
        a = QD[i] + QD - 2.0 * K[i]
        a = np.where(a > 0, a, _TAU)
        j = int(np.argmax(np.where(cand, b * b / a, -np.inf)))

        ai_old, aj_old = alpha[i], alpha[j]
        Kij = K[i, j]
        if y[i] != y[j]:
            quad = max(QD[i] + QD[j] + 2.0 * y[i] * y[j] * Kij, _TAU)
            delta = (-G[i] - G[j]) / quad
            diff = ai_old - aj_old
            ai, aj = ai_old + delta, aj_old + delta
            if diff > 0:
                if aj < 0:
                    aj, ai = 0.0, diff
            elif ai < 0:
                ai, aj = 0.0, -diff
            if diff > 0:
                if ai > C:
                    ai, aj = C, C - diff
            elif aj > C:
                aj, ai = C, C + diff
        else:
            quad = max(QD[i] + QD[j] - 2.0 * y[i] * y[j] * Kij, _TAU)
            delta = (G[i] - G[j]) / quad
            s = ai_old + aj_old
            ai, aj = ai_old - delta, aj_old + delta
            if s > C:
                if ai > C:
                    ai, aj = C, s - C
            elif aj < 0:
                aj, ai = 0.0, s
            if s > C:
                if aj > C:
                    aj, ai = C, s - C
            elif ai < 0:
                ai, aj = 0.0, s
        alpha[i], alpha[j] = ai, aj
        # Q[:, t] = y * y_t * K[:, t]
        G += y * (y[i] * (ai - ai_old) * K[:, i] + y[j] * (aj - aj_old) * K[:, j])
        it += 1

    yG = y * G
    at_upper = alpha >= C
    at_lower = alpha <= 0
    free = ~at_upper & ~at_lower
    if free.any():
        rho = float(yG[free].mean())
    else:
        ub_mask = (at_upper & (y < 0)) | (at_lower & (y > 0))
        lb_mask = (at_upper & (y > 0)) | (at_lower & (y < 0))
        ub = yG[ub_mask].min() if ub_mask.any() else np.inf
        lb = yG[lb_mask].max() if lb_mask.any() else -np.inf
        rho = float((ub + lb) / 2.0) if np.isfinite(ub) and np.isfinite(lb) else 0.0
    return alpha, rho, it


def platt_fit(f: np.ndarray, y: np.ndarray, max_iter: int = 100) -> tuple[float, float]:
    """Fit P(y=1|f) = 1 / (1 + exp(A f + B)) by regularized-target Newton iterations."""
    n_pos = int((y > 0).sum())
    n_neg = len(y) - n_pos
    hi, lo = (n_pos + 1.0) / (n_pos + 2.0), 1.0 / (n_neg + 2.0)
    t = np.where(y > 0, hi, lo)
    A, B = 0.0, math.log((n_neg + 1.0) / (n_pos + 1.0))

    def objective(A, B):
        z = f * A + B
        return float(np.sum(np.where(z >= 0, t * z + np.log1p(np.exp(-np.abs(z))),
                                     (t - 1) * z + np.log1p(np.exp(-np.abs(z))))))

    fval = objective(A, B)
    for _ in range(max_iter):
        z = f * A + B
        p = np.where(z >= 0, np.exp(-np.abs(z)) / (1 + np.exp(-np.abs(z))), 1 / (1 + np.exp(-np.abs(z))))
        q = 1 - p
        d2 = p * q
        h11 = 1e-12 + np.sum(f * f * d2)
        h22 = 1e-12 + np.sum(d2)
        h21 = np.sum(f * d2)
        d1 = t - p
        g1, g2 = np.sum(f * d1), np.sum(d1)
        if abs(g1) < 1e-5 and abs(g2) < 1e-5:
            break
        det = h11 * h22 - h21 * h21
        dA = -(h22 * g1 - h21 * g2) / det
        dB = -(-h21 * g1 + h11 * g2) / det
        gd = g1 * dA + g2 * dB
        step = 1.0
        while step >= 1e-10:
            nA, nB = A + step * dA, B + step * dB
            nval = objective(nA, nB)
            if nval < fval + 1e-4 * step * gd:
                A, B, fval = nA, nB, nval
                break
            step /= 2.0
        else:
            break
    return A, B


class SVMClassifier:
    """One binary SMO machine per class against the rest; Platt sigmoids give per-class
    probabilities, renormalized to sum to one."""

    def __init__(self, C: float = 1.0, gamma: float | str = "scale", tol: float = 1e-3,
                 max_iter: int = 100, epsilon: float = 0.1, seed: int = 0):
        self.C = C
        self.gamma = gamma
        self.tol = tol
        self.max_iter = max_iter
        # regression-only parameter, kept for the record
        self.epsilon = epsilon
        self.seed = seed

    def fit(self, X: np.ndarray, y: np.ndarray, n_classes: int) -> "SVMClassifier":
        self.n_classes = n_classes
        if self.gamma == "scale":
            var = X.var()
            self.gamma_ = 1.0 / (X.shape[1] * var) if var > 0 else 1.0
        else:
            self.gamma_ = float(self.gamma)
        K = rbf_kernel(X, X, self.gamma_)
        self.X = X
        self.machines = []
        self.iterations = []
        for c in range(n_classes):
            yc = np.where(y == c, 1.0, -1.0)
            if (yc > 0).all() or (yc < 0).all():
                self.machines.append(None)
                continue
            alpha, rho, it = smo(K, yc, self.C, self.tol, self.max_iter)
            coef = alpha * yc
            f = K @ coef - rho
            A, B = platt_fit(f, yc)
            sv = np.nonzero(alpha > 0)[0]
            self.machines.append((sv, coef[sv], rho, A, B))
            self.iterations.append(it)
        return self

    def decision_function(self, X: np.ndarray) -> np.ndarray:
        out = np.zeros((len(X), self.n_classes))
        for c, mach in enumerate(self.machines):
            if mach is None:
                continue
            sv, coef, rho, _, _ = mach
            out[:, c] = rbf_kernel(X, self.X[sv], self.gamma_) @ coef - rho
        return out

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        f = self.decision_function(X)
        P = np.zeros_like(f)
        for c, mach in enumerate(self.machines):
            if mach is None:
                continue
            _, _, _, A, B = mach
            z = f[:, c] * A + B
            P[:, c] = np.where(z >= 0, np.exp(-z.clip(0)) / (1 + np.exp(-z.clip(0))),
                               1 / (1 + np.exp(z.clip(None, 0))))
        total = P.sum(axis=1, keepdims=True)
        P = np.where(total > 0, P / np.where(total > 0, total, 1.0), 1.0 / self.n_classes)
        return P
