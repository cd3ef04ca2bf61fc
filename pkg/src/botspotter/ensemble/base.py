"""Common train/predict-proba port over the six classifier kinds."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Protocol, Sequence

import numpy as np

from botspotter.domain import PARTIES
from botspotter.ensemble.bayes import GaussianNaiveBayes
from botspotter.ensemble.boosting import AdaBoostSAMMER
from botspotter.ensemble.forest import RandomForest
from botspotter.ensemble.knn import KNearestNeighbors
from botspotter.ensemble.mlp import MLPClassifier
from botspotter.ensemble.svm import SVMClassifier
from botspotter.errors import DataError

KINDS = ("random_forest", "mlp", "svm", "naive_bayes", "knn", "adaboost")

DEFAULT_PARAMS: dict[str, dict] = {
    "random_forest": {"n_trees": 10, "min_samples_split": 5},
    "mlp": {"hidden": 100, "learning_rate": 1e-3, "epochs": 200, "batch_size": None},
    "svm": {"C": 1.0, "gamma": "scale", "tol": 1e-3, "max_iter": 100, "epsilon": 0.1},
    "naive_bayes": {"var_floor": 1e-9},
    "knn": {"n_neighbors": 5},
    "adaboost": {"n_estimators": 50, "max_depth": 2},
}

_SEEDED = {"random_forest", "mlp", "svm", "adaboost"}
_FACTORIES = {
    "random_forest": RandomForest,
    "mlp": MLPClassifier,
    "svm": SVMClassifier,
    "naive_bayes": GaussianNaiveBayes,
    "knn": KNearestNeighbors,
    "adaboost": AdaBoostSAMMER,
}


class ProbabilisticModel(Protocol):
    def predict_proba(self, X: np.ndarray) -> np.ndarray: ...


@dataclass(frozen=True)
class ClassifierSpec:
    kind: str
    params: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown classifier kind {self.kind!r}")

    def resolved_params(self) -> dict:
        p = {**DEFAULT_PARAMS[self.kind], **self.params}
        if self.kind in _SEEDED:
            p["seed"] = self.seed
        return p

    def build(self):
        return _FACTORIES[self.kind](**self.resolved_params())

    def to_dict(self) -> dict:
        return {"kind": self.kind, "params": self.resolved_params(), "seed": self.seed}


def default_specs(seed: int = 0) -> list[ClassifierSpec]:
    return [ClassifierSpec(k, seed=seed + i) for i, k in enumerate(KINDS)]


@dataclass
class TrainedModel:
    """A fitted classifier whose outputs are spread over the full party list."""

    spec: ClassifierSpec
    model: object
    classes: tuple[str, ...]

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        local = self.model.predict_proba(X)
        out = np.zeros((len(X), len(PARTIES)))
        for j, party in enumerate(self.classes):
            out[:, PARTIES.index(party)] = local[:, j]
        return out


def encode_labels(labels: Sequence[str]) -> tuple[np.ndarray, tuple[str, ...]]:
    unknown = sorted(set(labels) - set(PARTIES))
    if unknown:
        raise DataError(f"labels outside the party list: {unknown}")
    classes = tuple(p for p in PARTIES if p in set(labels))
    index = {p: i for i, p in enumerate(classes)}
    return np.array([index[l] for l in labels], dtype=np.int64), classes


def check_training_set(X: np.ndarray, labels: Sequence[str]) -> None:
    if len(X) == 0:
        raise DataError("empty training set")
    if len(X) != len(labels):
        raise DataError(f"{len(X)} feature rows but {len(labels)} labels")
    if not np.all(np.isfinite(X)):
        raise DataError("training features contain NaN or infinite values")
    if len(set(labels)) < 2:
        raise DataError("training set needs at least two classes")


def train(spec: ClassifierSpec, X: np.ndarray, labels: Sequence[str]) -> TrainedModel:
    X = np.asarray(X, dtype=float)
    check_training_set(X, labels)
    y, classes = encode_labels(labels)
    model = spec.build().fit(X, y, len(classes))
    return TrainedModel(spec, model, classes)


def class_counts(labels: Sequence[str]) -> dict[str, int]:
    return {p: sum(1 for l in labels if l == p) for p in PARTIES}
