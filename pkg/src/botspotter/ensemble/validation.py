"""Stratified k-fold cross-validation and classification metrics."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.stats import rankdata

from botspotter.ensemble.base import ClassifierSpec, check_training_set, encode_labels
from botspotter.errors import DataError

METRICS = ("accuracy", "precision", "recall", "f1", "auc")


def stratified_folds(y: np.ndarray, k: int, seed: int) -> list[np.ndarray]:
    """Test-index arrays for k folds; every class is dealt round-robin after a seeded shuffle."""
    counts = np.bincount(y)
    short = {int(c): int(n) for c, n in enumerate(counts) if 0 < n < k}
    if short:
        raise DataError(
            f"classes {short} have fewer members than the {k} folds; "
            f"lower --folds to at most {min(short.values())} or add labeled users"
        )
    rng = np.random.default_rng(seed)
    assign = np.empty(len(y), dtype=np.int64)
    offset = 0
    for c in range(len(counts)):
        idx = np.nonzero(y == c)[0]
        idx = idx[rng.permutation(len(idx))]
        assign[idx] = (np.arange(len(idx)) + offset) % k
        offset += len(idx)
    return [np.nonzero(assign == f)[0] for f in range(k)]


def roc_auc(truth: np.ndarray, score: np.ndarray) -> float:
    """Binary AUC via the rank-sum statistic; ties get average ranks."""
    truth = np.asarray(truth, dtype=bool)
    n_pos = int(truth.sum())
    n_neg = len(truth) - n_pos
    if n_pos == 0 or n_neg == 0:
        return float("nan")
    ranks = rankdata(score)
    return float((ranks[truth].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def classification_metrics(y: np.ndarray, proba: np.ndarray) -> dict[str, float]:
    """Accuracy; support-weighted precision/recall/F1; macro one-vs-rest AUC."""
    k = proba.shape[1]
    pred = proba.argmax(axis=1)
    out = {"accuracy": float(np.mean(pred == y))}
    support = np.bincount(y, minlength=k).astype(float)
    prec = np.zeros(k)
    rec = np.zeros(k)
    f1 = np.zeros(k)
    for c in range(k):
        tp = np.sum((pred == c) & (y == c))
        fp = np.sum((pred == c) & (y != c))
        fn = np.sum((pred != c) & (y == c))
        prec[c] = tp / (tp + fp) if tp + fp else 0.0
        rec[c] = tp / (tp + fn) if tp + fn else 0.0
        f1[c] = 2 * prec[c] * rec[c] / (prec[c] + rec[c]) if prec[c] + rec[c] else 0.0
    w = support / support.sum()
    out["precision"] = float(w @ prec)
    out["recall"] = float(w @ rec)
    out["f1"] = float(w @ f1)
    aucs = [roc_auc(y == c, proba[:, c]) for c in range(k) if support[c] > 0]
    out["auc"] = float(np.nanmean(aucs)) if aucs else float("nan")
    return out


@dataclass
class CVReport:
    folds: int
    seed: int
    metrics: dict[str, dict[str, float]] = field(default_factory=dict)
    per_fold: dict[str, list[dict[str, float]]] = field(default_factory=dict)

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["model", *METRICS])
            for name, m in self.metrics.items():
                w.writerow([name, *(f"{m[k]:.6f}" for k in METRICS)])


def cross_validate(specs: Sequence[ClassifierSpec], X: np.ndarray, labels: Sequence[str],
                   folds: int = 10, seed: int = 0) -> CVReport:
    X = np.asarray(X, dtype=float)
    check_training_set(X, labels)
    y, classes = encode_labels(labels)
    splits = stratified_folds(y, folds, seed)
    report = CVReport(folds=folds, seed=seed)
    for spec in specs:
        rows = []
        for test in splits:
            train_mask = np.ones(len(y), dtype=bool)
            train_mask[test] = False
            model = spec.build().fit(X[train_mask], y[train_mask], len(classes))
            rows.append(classification_metrics(y[test], model.predict_proba(X[test])))
        report.per_fold[spec.kind] = rows
        report.metrics[spec.kind] = {m: float(np.mean([r[m] for r in rows])) for m in METRICS}
    return report
