"""Probability fusion across models and the reject-option affinity rule."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from botspotter.domain import PARTIES, UNKNOWN
from botspotter.errors import DataError

SIMPLEX_TOL = 1e-6
MATRIX_LABELS = (*PARTIES, UNKNOWN)


def fuse(probas: Sequence[np.ndarray]) -> np.ndarray:
    """Per-party arithmetic mean of the models' probability vectors (or matrices)."""
    if len(probas) == 0:
        raise ValueError("nothing to fuse")
    return np.mean(np.stack([np.asarray(p, dtype=float) for p in probas]), axis=0)


def fuse_models(models: Sequence, X: np.ndarray) -> np.ndarray:
    return fuse([m.predict_proba(X) for m in models])


def threshold(n_parties: int = len(PARTIES)) -> float:
    if n_parties < 1:
        raise ValueError("need at least one party")
    return 1.0 - 1.0 / n_parties


@dataclass(frozen=True)
class AffinityDecision:
    kind: str                      # "single" | "pair" | "rejected"
    parties: tuple[str, ...]
    fused: tuple[float, ...]
    delta: float

    @property
    def label(self) -> str:
        return "-".join(self.parties) if self.parties else UNKNOWN

    @property
    def accepted(self) -> bool:
        return self.kind != "rejected"

    def prob(self, party: str) -> float:
        return self.fused[PARTIES.index(party)]


def _as_vector(fused) -> np.ndarray:
    if isinstance(fused, Mapping):
        extra = set(fused) - set(PARTIES)
        if extra:
            raise ValueError(f"unknown parties {sorted(extra)}")
        fused = [fused.get(p, 0.0) for p in PARTIES]
    v = np.asarray(fused, dtype=float)
    if v.shape != (len(PARTIES),):
        raise ValueError(f"expected {len(PARTIES)} probabilities, got shape {v.shape}")
    if not np.all(np.isfinite(v)) or np.any(v < -SIMPLEX_TOL) or np.any(v > 1 + SIMPLEX_TOL):
        raise ValueError(f"probabilities outside [0, 1]: {v}")
    if abs(v.sum() - 1.0) > SIMPLEX_TOL:
        raise ValueError(f"probabilities sum to {v.sum()}, not 1")
    return v


def decide_affinity(fused, delta: float = threshold()) -> AffinityDecision:
    """Single party if its probability exceeds delta, else the top two if their sum does,
    else rejected. Equal probabilities rank in canonical party order."""
    v = _as_vector(fused)
    order = sorted(range(len(PARTIES)), key=lambda i: (-v[i], i))
    top1, top2 = order[0], order[1]
    probs = tuple(float(x) for x in v)
    if v[top1] > delta:
        return AffinityDecision("single", (PARTIES[top1],), probs, delta)
    if v[top1] + v[top2] > delta:
        return AffinityDecision("pair", (PARTIES[top1], PARTIES[top2]), probs, delta)
    return AffinityDecision("rejected", (), probs, delta)


def affinity_matrix(decisions: Sequence[AffinityDecision]) -> np.ndarray:
    """Counts indexed by (first party, second party) over parties + Unknown.

    Single-party decisions land on the diagonal, rejections in (Unknown, Unknown).
    """
    idx = {p: i for i, p in enumerate(MATRIX_LABELS)}
    m = np.zeros((len(MATRIX_LABELS), len(MATRIX_LABELS)), dtype=np.int64)
    for d in decisions:
        if d.kind == "single":
            m[idx[d.parties[0]], idx[d.parties[0]]] += 1
        elif d.kind == "pair":
            m[idx[d.parties[0]], idx[d.parties[1]]] += 1
        else:
            m[idx[UNKNOWN], idx[UNKNOWN]] += 1
    return m


def classify_bots(models: Sequence, uids: Sequence[str], X: np.ndarray, delta: float = threshold()
                  ) -> tuple[dict[str, AffinityDecision], np.ndarray]:
    if len(uids) == 0:
        return {}, affinity_matrix([])
    fused = fuse_models(models, X)
    decisions = {uid: decide_affinity(row, delta) for uid, row in zip(uids, fused)}
    return decisions, affinity_matrix(list(decisions.values()))


DECISION_COLUMNS = ["uid", "kind", "party1", "party2", *(f"p_{p}" for p in PARTIES), "delta"]


def write_decisions(path: str | Path, decisions: Mapping[str, AffinityDecision]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(DECISION_COLUMNS)
        for uid, d in decisions.items():
            p1 = d.parties[0] if d.parties else ""
            p2 = d.parties[1] if len(d.parties) > 1 else ""
            w.writerow([uid, d.kind, p1, p2, *(repr(x) for x in d.fused), repr(d.delta)])


def read_decisions(path: str | Path) -> dict[str, AffinityDecision]:
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read decisions {path}: {exc}") from exc
    out = {}
    with fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != DECISION_COLUMNS:
            raise DataError(f"{path} is not a decisions file")
        for row in reader:
            parties = tuple(p for p in (row["party1"], row["party2"]) if p)
            fused = tuple(float(row[f"p_{p}"]) for p in PARTIES)
            out[row["uid"]] = AffinityDecision(row["kind"], parties, fused, float(row["delta"]))
    return out


def write_affinity_matrix(path: str | Path, m: np.ndarray) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["first", *MATRIX_LABELS])
        for label, row in zip(MATRIX_LABELS, m):
            w.writerow([label, *(int(x) for x in row)])
