"""Tables and plot-ready daily series computed from an augmented, gated corpus.

Every report is a pure function of its inputs and returns a `Table` with a fixed column
order, so CSV output is byte-stable. Days are UTC calendar days.
"""
from __future__ import annotations

import csv
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import Mapping

import numpy as np

from botspotter.corpus import Corpus
from botspotter.domain import INTERACTION_TYPES, PARTIES, TWEET_TYPES, UNKNOWN, UserClass
from botspotter.ensemble.fusion import AffinityDecision

USER_CLASSES = tuple(c.value for c in UserClass)
ACTIVE_CLASSES = ("human", "bot")
NO_PARTY = "none"


@dataclass
class Table:
    columns: tuple[str, ...]
    rows: list[tuple] = field(default_factory=list)

    def column(self, name: str) -> list:
        i = self.columns.index(name)
        return [r[i] for r in self.rows]

    def to_dicts(self) -> list[dict]:
        return [dict(zip(self.columns, r)) for r in self.rows]

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(self.columns)
            for r in self.rows:
                w.writerow([repr(x) if isinstance(x, float) else x for x in r])


def day_of(ts: int) -> str:
    return datetime.fromtimestamp(ts, tz=timezone.utc).strftime("%Y-%m-%d")


def _day_range(first: str, last: str) -> list[str]:
    d = datetime.strptime(first, "%Y-%m-%d")
    end = datetime.strptime(last, "%Y-%m-%d")
    out = []
    while d <= end:
        out.append(d.strftime("%Y-%m-%d"))
        d += timedelta(days=1)
    return out


def user_classes(c: Corpus) -> dict[str, str]:
    """uid -> gate class; users never gated map to `uncertain` so they drop out of class splits."""
    return {uid: (u.user_class.value if u.user_class is not None else UserClass.UNCERTAIN.value)
            for uid, u in c.users.items()}


# --- volume tables --------------------------------------------------------------------

def tweet_type_table(c: Corpus) -> Table:
    """Per tweet type: count, share of all tweets, and tweets per distinct author of that type."""
    table = Table(("type", "count", "proportion", "per_user_avg"))
    total = len(c.tweets)
    if total == 0:
        return table
    counts = Counter(t.type.value for t in c.tweets.values())
    authors: dict[str, set] = defaultdict(set)
    for t in c.tweets.values():
        authors[t.type.value].add(t.author_uid)
    for ty in TWEET_TYPES:
        n = counts.get(ty, 0)
        avg = n / len(authors[ty]) if authors[ty] else 0.0
        table.rows.append((ty, n, n / total, avg))
    return table


def user_group_table(c: Corpus, classes: Mapping[str, str] | None = None) -> Table:
    """Per user class: user count, share of users, and average tweets per user."""
    table = Table(("class", "users", "proportion", "avg_tweets"))
    classes = dict(classes) if classes is not None else user_classes(c)
    total = len(classes)
    if total == 0:
        return table
    n_users = Counter(classes.values())
    n_tweets = Counter(classes.get(t.author_uid) for t in c.tweets.values())
    for cls in USER_CLASSES:
        n = n_users.get(cls, 0)
        table.rows.append((cls, n, n / total, n_tweets.get(cls, 0) / n if n else 0.0))
    return table


def class_type_table(c: Corpus, classes: Mapping[str, str] | None = None) -> Table:
    """Tweet counts split by the author's class and the tweet type, with per-class totals."""
    table = Table(("class", *TWEET_TYPES, "total"))
    if not c.tweets:
        return table
    classes = classes if classes is not None else user_classes(c)
    counts = Counter((classes.get(t.author_uid, UNKNOWN), t.type.value) for t in c.tweets.values())
    for cls in (*USER_CLASSES, UNKNOWN):
        row = [counts.get((cls, ty), 0) for ty in TWEET_TYPES]
        if cls == UNKNOWN and not any(row):
            continue
        table.rows.append((cls, *row, sum(row)))
    return table


# --- daily series ---------------------------------------------------------------------

def daily_volumes(c: Corpus, group_by: str = "type", classes: Mapping[str, str] | None = None) -> Table:
    """(date, key, count) rows for every day/key pair with at least one tweet, sorted.

    `type` keys by tweet type, `class` by the author's gate class, `party` by the tweet's
    exclusive party label (`none` when unlabeled).
    """
    if group_by == "type":
        key = lambda t: t.type.value  # noqa: E731
    elif group_by == "class":
        classes = classes if classes is not None else user_classes(c)
        key = lambda t: classes.get(t.author_uid, UNKNOWN)  # noqa: E731
    elif group_by == "party":
        key = lambda t: t.party_label or NO_PARTY  # noqa: E731
    else:
        raise ValueError(f"unknown grouping {group_by!r}")
    counts = Counter((day_of(t.timestamp), key(t)) for t in c.tweets.values())
    return Table(("date", "key", "count"), [(d, k, n) for (d, k), n in sorted(counts.items())])


def first_seen(c: Corpus) -> dict[str, int]:
    """uid -> timestamp of the user's earliest collected tweet."""
    out: dict[str, int] = {}
    for t in c.tweets.values():
        if t.author_uid not in out or t.timestamp < out[t.author_uid]:
            out[t.author_uid] = t.timestamp
    return out


def bot_appearance(c: Corpus, decisions: Mapping[str, AffinityDecision]) -> Table:
    """New bots per day keyed by affinity label, plus the running total per label.

    Rows are dense over the days from the first to the last appearance so each label's
    cumulative column is a complete step series.
    """
    table = Table(("date", "key", "new", "cumulative"))
    seen = first_seen(c)
    new = Counter((day_of(seen[uid]), d.label) for uid, d in decisions.items() if uid in seen)
    if not new:
        return table
    days = sorted({d for d, _ in new})
    keys = sorted({k for _, k in new})
    running = dict.fromkeys(keys, 0)
    for day in _day_range(days[0], days[-1]):
        for k in keys:
            n = new.get((day, k), 0)
            running[k] += n
            table.rows.append((day, k, n, running[k]))
    return table


def bot_retweet_activity(c: Corpus, decisions: Mapping[str, AffinityDecision]) -> Table:
    """Daily retweet activity around single-party bots.

    `total` counts retweets made by the bots of each party; `associated` counts retweets
    (by anyone) of tweets those bots authored.
    """
    party_of = {uid: d.parties[0] for uid, d in decisions.items() if d.kind == "single"}
    counts: Counter = Counter()
    for t in c.tweets.values():
        if t.type.value != "retweet":
            continue
        day = day_of(t.timestamp)
        if t.author_uid in party_of:
            counts[(day, party_of[t.author_uid], "total")] += 1
        target = c.tweets.get(t.ref_tid)
        if target is not None and target.author_uid in party_of:
            counts[(day, party_of[target.author_uid], "associated")] += 1
    return Table(("date", "party", "series", "count"),
                 [(d, p, s, n) for (d, p, s), n in sorted(counts.items())])


# --- interactions -----------------------------------------------------------------------

@dataclass
class InteractionMatrix:
    counts: dict[tuple[str, str, str], int]
    excluded: int = 0

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def to_table(self) -> Table:
        return Table(("active", "passive", "type", "count"),
                     [(a, p, ty, self.counts[(a, p, ty)])
                      for a in ACTIVE_CLASSES for p in ACTIVE_CLASSES for ty in INTERACTION_TYPES])


def interaction_matrix(c: Corpus, classes: Mapping[str, str] | None = None) -> InteractionMatrix:
    """Interactions between the creator (active) and the referenced tweet's author (passive).

    Tweets whose target is outside the corpus, or where either side is not a human or a bot,
    are excluded and counted in `excluded`.
    """
    classes = classes if classes is not None else user_classes(c)
    counts = {(a, p, ty): 0 for a in ACTIVE_CLASSES for p in ACTIVE_CLASSES for ty in INTERACTION_TYPES}
    excluded = 0
    for t in c.tweets.values():
        if t.ref_tid is None:
            continue
        target = c.tweets.get(t.ref_tid)
        a = classes.get(t.author_uid)
        p = classes.get(target.author_uid) if target is not None else None
        if a in ACTIVE_CLASSES and p in ACTIVE_CLASSES:
            counts[(a, p, t.type.value)] += 1
        else:
            excluded += 1
    return InteractionMatrix(counts, excluded)


# --- sentiment -----------------------------------------------------------------------------

def comparison_groups(c: Corpus, decisions: Mapping[str, AffinityDecision] | None = None) -> dict[str, str]:
    """uid -> group: `labeled_<party>` for manually labeled users, `bot_<party>` for
    single-party bots."""
    groups = {uid: f"labeled_{u.manual_party}" for uid, u in c.users.items()
              if u.manual_party is not None and u.user_class is not UserClass.REMOVED}
    for uid, d in (decisions or {}).items():
        if d.kind == "single" and uid not in groups:
            groups[uid] = f"bot_{d.parties[0]}"
    return groups


def sentiment_distributions(c: Corpus, groups: Mapping[str, str]) -> Table:
    """Five-number summary and mean of tweet sentiment per (author group, tweet party)."""
    table = Table(("group", "target", "n", "min", "q1", "median", "q3", "max", "mean"))
    samples: dict[tuple[str, str], list[float]] = defaultdict(list)
    for t in c.tweets.values():
        g = groups.get(t.author_uid)
        if g is None or t.party_label is None or t.sentiment is None:
            continue
        samples[(g, t.party_label)].append(t.sentiment)
    for g in sorted({g for g, _ in samples}):
        for p in PARTIES:
            s = samples.get((g, p))
            if not s:
                continue
            arr = np.asarray(s)
            q = np.percentile(arr, [0, 25, 50, 75, 100], method="linear")
            table.rows.append((g, p, len(s), *(float(x) for x in q), float(arr.mean())))
    return table


REPORT_KINDS = ("types", "groups", "class-types", "daily", "appearance", "matrix", "sentiment", "activity")


def build_report(kind: str, c: Corpus, decisions: Mapping[str, AffinityDecision] | None = None,
                 group_by: str = "type") -> Table:
    decisions = decisions or {}
    if kind == "types":
        return tweet_type_table(c)
    if kind == "groups":
        return user_group_table(c)
    if kind == "class-types":
        return class_type_table(c)
    if kind == "daily":
        return daily_volumes(c, group_by)
    if kind == "appearance":
        return bot_appearance(c, decisions)
    if kind == "matrix":
        return interaction_matrix(c).to_table()
    if kind == "sentiment":
        return sentiment_distributions(c, comparison_groups(c, decisions))
    if kind == "activity":
        return bot_retweet_activity(c, decisions)
    raise ValueError(f"unknown report kind {kind!r}")
