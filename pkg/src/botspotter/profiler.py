"""Per-user average-sentiment features over (tweet type, party) and (tweet type, party, theme) cells."""
from __future__ import annotations

import csv
import math
from collections import defaultdict
from dataclasses import dataclass
from itertools import product
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from botspotter.corpus import Corpus, Tweet
from botspotter.domain import PARTIES, THEMES, TWEET_TYPES, UserClass
from botspotter.errors import DataError

IMPUTED = 0.5

_N_TYPE, _N_PARTY, _N_THEME = len(TWEET_TYPES), len(PARTIES), len(THEMES)
N_PARTY_CELLS = _N_TYPE * _N_PARTY
N_FEATURES = N_PARTY_CELLS + N_PARTY_CELLS * _N_THEME

_TYPE_IDX = {t: i for i, t in enumerate(TWEET_TYPES)}
_PARTY_IDX = {p: i for i, p in enumerate(PARTIES)}
_THEME_IDX = {g: i for i, g in enumerate(THEMES)}


def party_cell(tweet_type: str, party: str) -> int:
    return _TYPE_IDX[tweet_type] * _N_PARTY + _PARTY_IDX[party]


def theme_cell(tweet_type: str, party: str, theme: str) -> int:
    return N_PARTY_CELLS + (_TYPE_IDX[tweet_type] * _N_PARTY + _PARTY_IDX[party]) * _N_THEME + _THEME_IDX[theme]


def feature_names() -> list[str]:
    names = [f"s_{t}_{p}" for t, p in product(TWEET_TYPES, PARTIES)]
    names += [f"s_{t}_{p}_{g}" for t, p, g in product(TWEET_TYPES, PARTIES, THEMES)]
    return names


@dataclass
class FeatureVector:
    uid: str
    values: np.ndarray
    support: np.ndarray


@dataclass
class EligibilityReport:
    eligible_bots: set[str]
    total_bots: int

    @property
    def ratio(self) -> float:
        return len(self.eligible_bots) / self.total_bots if self.total_bots else 0.0


def _mean_support(sents: list[float]) -> tuple[float, int]:
    if not sents:
        return IMPUTED, 0
    return math.fsum(sents) / len(sents), len(sents)


def sentiment_party(uid: str, tweet_type: str, party: str, c: Corpus) -> tuple[float, int]:
    return _mean_support([
        t.sentiment for t in c.tweets.values()
        if t.author_uid == uid and t.type.value == tweet_type and t.party_label == party
        and t.sentiment is not None
    ])


def sentiment_party_theme(uid: str, tweet_type: str, party: str, theme: str, c: Corpus) -> tuple[float, int]:
    return _mean_support([
        t.sentiment for t in c.tweets.values()
        if t.author_uid == uid and t.type.value == tweet_type and t.party_label == party
        and theme in t.theme_hits and t.sentiment is not None
    ])


def _accumulate(uid: str, tweets: Iterable[Tweet]) -> FeatureVector:
    cells: dict[int, list[float]] = defaultdict(list)
    for t in tweets:
        if t.party_label is None or t.sentiment is None:
            continue
        cells[party_cell(t.type.value, t.party_label)].append(t.sentiment)
        for g in t.theme_hits:
            cells[theme_cell(t.type.value, t.party_label, g)].append(t.sentiment)
    values = np.full(N_FEATURES, IMPUTED)
    support = np.zeros(N_FEATURES, dtype=np.int64)
    # fsum is exactly rounded, so cells do not depend on tweet order
    for i, sents in cells.items():
        values[i], support[i] = _mean_support(sents)
    return FeatureVector(uid, values, support)


def build_feature_vector(uid: str, c: Corpus) -> FeatureVector:
    return _accumulate(uid, (t for t in c.tweets.values() if t.author_uid == uid))


def build_feature_matrix(c: Corpus, uids: Sequence[str]) -> tuple[np.ndarray, np.ndarray]:
    """Stack feature vectors for `uids` (rows in the given order): (values, supports)."""
    by_author = c.tweets_by_author()
    vecs = [_accumulate(u, by_author.get(u, ())) for u in uids]
    if not vecs:
        return np.zeros((0, N_FEATURES)), np.zeros((0, N_FEATURES), dtype=np.int64)
    return np.vstack([v.values for v in vecs]), np.vstack([v.support for v in vecs])


def eligible_bots(c: Corpus) -> EligibilityReport:
    bots = {uid for uid, u in c.users.items() if u.user_class is UserClass.BOT}
    labeled = {t.author_uid for t in c.tweets.values() if t.party_label is not None}
    return EligibilityReport(eligible_bots=bots & labeled, total_bots=len(bots))


def select_users(c: Corpus, who: str) -> list[str]:
    """`bots`: eligible bots; `labeled`: users with a manual party; `all`: every non-removed user."""
    if who == "bots":
        keep = eligible_bots(c).eligible_bots
        return [uid for uid in c.users if uid in keep]
    if who == "labeled":
        return [uid for uid, u in c.users.items()
                if u.manual_party is not None and u.user_class is not UserClass.REMOVED]
    if who == "all":
        return list(c.active_users())
    raise ValueError(f"unknown selection {who!r}")


def write_feature_csv(path: str | Path, uids: Sequence[str], values: np.ndarray, support: np.ndarray) -> None:
    names = feature_names()
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["uid", *names, *(f"n_{n[2:]}" for n in names)])
        for uid, v, s in zip(uids, values, support):
            w.writerow([uid, *(repr(float(x)) for x in v), *(int(x) for x in s)])


def read_feature_csv(path: str | Path) -> tuple[list[str], np.ndarray, np.ndarray]:
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read features {path}: {exc}") from exc
    with fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0][1:N_FEATURES + 1] != feature_names():
        raise DataError(f"{path} is not a feature matrix")
    body = rows[1:]
    uids = [r[0] for r in body]
    if not body:
        return uids, np.zeros((0, N_FEATURES)), np.zeros((0, N_FEATURES), dtype=np.int64)
    values = np.array([[float(x) for x in r[1:N_FEATURES + 1]] for r in body])
    support = np.array([[int(x) for x in r[N_FEATURES + 1:]] for r in body], dtype=np.int64)
    return uids, values, support


def write_labels(path: str | Path, labels: Mapping[str, str]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["uid", "party"])
        w.writerows(labels.items())


def read_labels(path: str | Path) -> dict[str, str]:
    """`uid,party` rows; parties must come from the fixed party list."""
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read labels {path}: {exc}") from exc
    out = {}
    with fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"uid", "party"} <= set(reader.fieldnames):
            raise DataError(f"{path} needs uid and party columns")
        for row in reader:
            if row["party"] not in PARTIES:
                raise DataError(f"{path}: unknown party {row['party']!r} for {row['uid']}")
            out[row["uid"]] = row["party"]
    return out
