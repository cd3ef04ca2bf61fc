"""Human/bot gating from bot-score percentiles."""
from __future__ import annotations

import csv
import logging
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Protocol

import numpy as np

from botspotter.corpus import Corpus, User
from botspotter.domain import UserClass
from botspotter.errors import DataError

log = logging.getLogger(__name__)

REFERENCE_THRESHOLDS = (0.236, 0.691)


class ScoreUnavailable(Exception):
    """Provider has no usable score for this uid."""


class ProviderFailure(Exception):
    """Transient provider error; worth retrying."""


class ScoreProvider(Protocol):
    def score(self, uid: str) -> float:
        """Return a score in [0, 1]; raise ScoreUnavailable or ProviderFailure."""


class FileScoreProvider:
    """`uid,score` rows. Out-of-range or non-numeric rows are rejected and counted."""

    def __init__(self, path: str | Path):
        self.scores: dict[str, float] = {}
        self.rejected = 0
        try:
            fh = open(path, newline="", encoding="utf-8")
        except OSError as exc:
            raise DataError(f"cannot read score file {path}: {exc}") from exc
        with fh:
            for row in csv.reader(fh):
                if not row or row[0] == "uid":
                    continue
                try:
                    s = float(row[1])
                except (IndexError, ValueError):
                    self.rejected += 1
                    continue
                if not 0.0 <= s <= 1.0:
                    self.rejected += 1
                    continue
                self.scores[row[0]] = s

    def score(self, uid: str) -> float:
        try:
            return self.scores[uid]
        except KeyError:
            raise ScoreUnavailable(uid) from None


class StoredScoreProvider:
    """Scores already attached to the corpus users (sidecar file)."""

    def __init__(self, users: Iterable[User]):
        self.scores = {u.uid: u.bot_score for u in users if u.bot_score is not None}

    def score(self, uid: str) -> float:
        try:
            return self.scores[uid]
        except KeyError:
            raise ScoreUnavailable(uid) from None


@dataclass
class RetryPolicy:
    attempts: int = 3
    backoff: float = 0.0


@dataclass
class FetchReport:
    scored: int = 0
    unavailable: int = 0
    out_of_range: int = 0
    failures: int = 0


@dataclass(frozen=True)
class GateThresholds:
    p75: float
    p95: float

    def __post_init__(self):
        if not 0.0 <= self.p75 <= self.p95 <= 1.0:
            raise ValueError(f"need 0 <= p75 <= p95 <= 1, got {self.p75}, {self.p95}")


@dataclass
class GateResult:
    thresholds: GateThresholds
    counts: dict[str, int] = field(default_factory=dict)

    @property
    def total(self) -> int:
        return sum(self.counts.values())


def fetch_scores(
    c: Corpus, provider: ScoreProvider, retry: RetryPolicy = RetryPolicy()
) -> tuple[Corpus, FetchReport]:
    report = FetchReport()
    users = []
    for u in c.users.values():
        if u.user_class is UserClass.REMOVED:
            users.append(u)
            continue
        score = None
        for attempt in range(retry.attempts):
            try:
                score = float(provider.score(u.uid))
                break
            except ScoreUnavailable:
                break
            except ProviderFailure:
                report.failures += 1
                if retry.backoff:
                    time.sleep(retry.backoff * 2**attempt)
        if score is not None and not 0.0 <= score <= 1.0:
            report.out_of_range += 1
            score = None
        if score is None:
            report.unavailable += 1
            users.append(replace(u, bot_score=None, user_class=UserClass.REMOVED))
        else:
            report.scored += 1
            users.append(replace(u, bot_score=score))
    return c.with_users(users), report


def compute_percentiles(scores: Iterable[float]) -> GateThresholds:
    arr = np.asarray(list(scores), dtype=float)
    if arr.size == 0:
        raise DataError("cannot compute percentiles of an empty score set")
    p75, p95 = np.percentile(arr, [75, 95], method="linear")
    return GateThresholds(float(p75), float(p95))


def class_of(score: float, th: GateThresholds) -> UserClass:
    if score >= th.p95:
        return UserClass.BOT
    if score < th.p75:
        return UserClass.HUMAN
    return UserClass.UNCERTAIN


def classify_users(c: Corpus, th: GateThresholds) -> tuple[Corpus, GateResult]:
    counts = {k.value: 0 for k in UserClass}
    users = []
    for u in c.users.values():
        if u.user_class is UserClass.REMOVED:
            counts["removed"] += 1
            users.append(u)
            continue
        if u.bot_score is None:
            raise DataError(f"user {u.uid} has no bot score and is not removed")
        cls = class_of(u.bot_score, th)
        counts[cls.value] += 1
        users.append(replace(u, user_class=cls))
    return c.with_users(users), GateResult(th, counts)


def gate(
    c: Corpus,
    provider: ScoreProvider | None = None,
    pin: tuple[float, float] | None = None,
) -> tuple[Corpus, GateResult, FetchReport]:
    """Attach scores, derive thresholds (or use pinned ones) and label every user."""
    provider = provider or StoredScoreProvider(c.users.values())
    c, fetched = fetch_scores(c, provider)
    if pin is not None:
        th = GateThresholds(*pin)
    else:
        th = compute_percentiles(
            u.bot_score for u in c.users.values() if u.user_class is not UserClass.REMOVED
        )
    c, result = classify_users(c, th)
    log.info("gate p75=%.4f p95=%.4f counts=%s", th.p75, th.p95, result.counts)
    return c, result, fetched
