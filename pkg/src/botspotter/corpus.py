"""Tweet/user collections: line-delimited ingestion, reference checks, removal and anonymization."""
from __future__ import annotations

import hashlib
import hmac
import json
import logging
import math
import uuid
from dataclasses import dataclass, field, replace
from datetime import date, datetime, timezone
from pathlib import Path
from typing import Iterable, Iterator

from botspotter.domain import DEFAULT_WINDOW, PARTIES, THEMES, TweetType, UserClass
from botspotter.errors import DataError

log = logging.getLogger(__name__)

TWEETS_FILE = "tweets.jsonl"
USERS_FILE = "users.jsonl"
META_FILE = "corpus.json"

_CORE_TWEET_KEYS = {
    "tid", "type", "timestamp", "author_uid", "ref_tid", "text",
    "sentiment", "theme_hits", "party_label",
}


@dataclass(frozen=True)
class Tweet:
    tid: str
    type: TweetType
    timestamp: int
    author_uid: str
    text: str = ""
    ref_tid: str | None = None
    sentiment: float | None = None
    theme_hits: frozenset[str] = frozenset()
    party_label: str | None = None
    # favorite/retweet counts and other collected fields; carried, never interpreted
    extra: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if (self.type is TweetType.ORIGINAL) != (self.ref_tid is None):
            raise ValueError(f"tweet {self.tid}: ref_tid must be present iff type != original")
        if self.sentiment is not None and not 0.0 <= self.sentiment <= 1.0:
            raise ValueError(f"tweet {self.tid}: sentiment {self.sentiment} outside [0, 1]")
        if self.party_label is not None and self.party_label not in PARTIES:
            raise ValueError(f"tweet {self.tid}: unknown party {self.party_label!r}")


@dataclass(frozen=True)
class User:
    uid: str
    bot_score: float | None = None
    user_class: UserClass | None = None
    followers: frozenset[str] = frozenset()
    followings: frozenset[str] = frozenset()
    manual_party: str | None = None

    def __post_init__(self):
        if self.bot_score is not None and not 0.0 <= self.bot_score <= 1.0:
            raise ValueError(f"user {self.uid}: bot score {self.bot_score} outside [0, 1]")
        if self.manual_party is not None and self.manual_party not in PARTIES:
            raise ValueError(f"user {self.uid}: unknown party {self.manual_party!r}")


@dataclass
class Corpus:
    tweets: dict[str, Tweet]
    users: dict[str, User]
    window: tuple[int, int]
    dangling: frozenset[str] = frozenset()

    def tweets_by_author(self) -> dict[str, list[Tweet]]:
        out: dict[str, list[Tweet]] = {uid: [] for uid in self.users}
        for t in self.tweets.values():
            out.setdefault(t.author_uid, []).append(t)
        return out

    def with_tweets(self, tweets: Iterable[Tweet]) -> "Corpus":
        return replace(self, tweets={t.tid: t for t in tweets})

    def with_users(self, users: Iterable[User]) -> "Corpus":
        return replace(self, users={u.uid: u for u in users})

    def active_users(self) -> dict[str, User]:
        return {uid: u for uid, u in self.users.items() if u.user_class is not UserClass.REMOVED}


@dataclass
class IngestReport:
    lines: int = 0
    accepted: int = 0
    malformed: int = 0
    out_of_window: int = 0
    duplicate: int = 0
    user_records: int = 0
    user_malformed: int = 0

    @property
    def skipped(self) -> int:
        return self.malformed + self.out_of_window + self.duplicate


@dataclass
class ReferenceReport:
    resolved: int
    dangling: list[str]


@dataclass
class RemovalReport:
    no_tweets: int
    listed: int
    unknown_ids: int


# --- timestamps -----------------------------------------------------------------

def parse_timestamp(value) -> int:
    """ISO-8601 string or epoch seconds (number or numeric string) to UTC epoch seconds."""
    if isinstance(value, bool):
        raise ValueError("boolean is not a timestamp")
    if isinstance(value, (int, float)):
        if not math.isfinite(value):
            raise ValueError("non-finite timestamp")
        return int(value)
    if not isinstance(value, str) or not value.strip():
        raise ValueError(f"bad timestamp {value!r}")
    s = value.strip()
    try:
        return int(float(s))
    except ValueError:
        pass
    if s.endswith(("Z", "z")):
        s = s[:-1] + "+00:00"
    if len(s) == 10:
        d = date.fromisoformat(s)
        return int(datetime(d.year, d.month, d.day, tzinfo=timezone.utc).timestamp())
    dt = datetime.fromisoformat(s)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return int(dt.timestamp())


def parse_window(start, end) -> tuple[int, int]:
    """Inclusive window; a bare end date covers that whole UTC day."""
    lo = parse_timestamp(start)
    hi = parse_timestamp(end)
    if isinstance(end, str) and len(end.strip()) == 10:
        hi += 86399
    if hi < lo:
        raise DataError(f"window end {end} precedes start {start}")
    return lo, hi


DEFAULT_WINDOW_SECONDS = parse_window(*DEFAULT_WINDOW)


# --- record parsing ---------------------------------------------------------------

def tweet_from_record(rec: dict) -> Tweet:
    ttype = TweetType(rec["type"])
    ref = rec.get("ref_tid")
    ref = None if ref in (None, "") else str(ref)
    hits = rec.get("theme_hits") or {}
    if isinstance(hits, dict):
        hits = frozenset(k for k, v in hits.items() if v)
    else:
        hits = frozenset(hits)
    if not hits <= set(THEMES):
        raise ValueError(f"unknown themes {sorted(hits - set(THEMES))}")
    sent = rec.get("sentiment")
    return Tweet(
        tid=str(rec["tid"]),
        type=ttype,
        timestamp=parse_timestamp(rec["timestamp"]),
        author_uid=str(rec["author_uid"]),
        text=str(rec.get("text") or ""),
        ref_tid=ref,
        sentiment=None if sent is None else float(sent),
        theme_hits=hits,
        party_label=rec.get("party_label"),
        extra={k: v for k, v in rec.items() if k not in _CORE_TWEET_KEYS},
    )


def tweet_to_record(t: Tweet) -> dict:
    rec = {
        "tid": t.tid,
        "type": t.type.value,
        "timestamp": t.timestamp,
        "author_uid": t.author_uid,
        "ref_tid": t.ref_tid,
        "text": t.text,
    }
    if t.sentiment is not None:
        rec["sentiment"] = t.sentiment
    if t.sentiment is not None or t.theme_hits or t.party_label is not None:
        rec["theme_hits"] = {g: g in t.theme_hits for g in THEMES}
        rec["party_label"] = t.party_label
    rec.update(t.extra)
    return rec


def user_from_record(rec: dict) -> User:
    score = rec.get("bot_score")
    cls = rec.get("user_class")
    return User(
        uid=str(rec["uid"]),
        bot_score=None if score is None else float(score),
        user_class=None if cls is None else UserClass(cls),
        followers=frozenset(str(x) for x in rec.get("followers") or ()),
        followings=frozenset(str(x) for x in rec.get("followings") or ()),
        manual_party=rec.get("manual_party") or None,
    )


def user_to_record(u: User) -> dict:
    return {
        "uid": u.uid,
        "bot_score": u.bot_score,
        "user_class": None if u.user_class is None else u.user_class.value,
        "followers": sorted(u.followers),
        "followings": sorted(u.followings),
        "manual_party": u.manual_party,
    }


def _iter_json_lines(path: Path) -> Iterator[tuple[int, dict | None]]:
    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    with fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError:
                yield lineno, None
                continue
            yield lineno, rec if isinstance(rec, dict) else None


# --- operations -------------------------------------------------------------------

def ingest_tweets(
    path: str | Path,
    window: tuple[int, int] = DEFAULT_WINDOW_SECONDS,
    users_path: str | Path | None = None,
) -> tuple[Corpus, IngestReport]:
    """Load a line-delimited tweet file, keeping parse-valid tweets inside `window`.

    Users are derived from tweet authors; the optional sidecar adds bot scores,
    follower/following lists and manual party labels (and may introduce users
    with no tweets, which `remove_unusable_users` later flags).
    """
    report = IngestReport()
    lo, hi = window
    tweets: dict[str, Tweet] = {}
    for lineno, rec in _iter_json_lines(Path(path)):
        report.lines += 1
        if rec is None:
            report.malformed += 1
            continue
        try:
            t = tweet_from_record(rec)
        except (KeyError, ValueError, TypeError) as exc:
            log.debug("line %d skipped: %s", lineno, exc)
            report.malformed += 1
            continue
        if not lo <= t.timestamp <= hi:
            report.out_of_window += 1
            continue
        if t.tid in tweets:
            report.duplicate += 1
            continue
        tweets[t.tid] = t
    report.accepted = len(tweets)

    users: dict[str, User] = {}
    for t in tweets.values():
        if t.author_uid not in users:
            users[t.author_uid] = User(uid=t.author_uid)
    if users_path is not None:
        for lineno, rec in _iter_json_lines(Path(users_path)):
            report.user_records += 1
            try:
                if rec is None:
                    raise ValueError("not a JSON object")
                u = user_from_record(rec)
            except (KeyError, ValueError, TypeError) as exc:
                log.debug("user line %d skipped: %s", lineno, exc)
                report.user_malformed += 1
                continue
            users[u.uid] = u
    known = users.keys()
    users = {
        uid: replace(u, followers=u.followers & known, followings=u.followings & known)
        for uid, u in users.items()
    }
    log.info(
        "ingested %d tweets (%d malformed, %d out of window, %d duplicate), %d users",
        report.accepted, report.malformed, report.out_of_window, report.duplicate, len(users),
    )
    return Corpus(tweets=tweets, users=users, window=(lo, hi)), report


def resolve_references(c: Corpus) -> tuple[Corpus, ReferenceReport]:
    dangling = [t.tid for t in c.tweets.values() if t.ref_tid is not None and t.ref_tid not in c.tweets]
    n_refs = sum(1 for t in c.tweets.values() if t.ref_tid is not None)
    return replace(c, dangling=frozenset(dangling)), ReferenceReport(n_refs - len(dangling), dangling)


def root_of(c: Corpus, t: Tweet) -> Tweet | None:
    """Follow retweet links to the first non-retweet; None when the chain dangles or loops."""
    seen = {t.tid}
    cur = t
    while cur.type is TweetType.RETWEET:
        nxt = c.tweets.get(cur.ref_tid)
        if nxt is None or nxt.tid in seen:
            return None
        seen.add(nxt.tid)
        cur = nxt
    return cur


def remove_unusable_users(c: Corpus, removed_ids: Iterable[str] = ()) -> tuple[Corpus, RemovalReport]:
    authors = {t.author_uid for t in c.tweets.values()}
    listed = set(removed_ids)
    unknown = len(listed - c.users.keys())
    users = []
    n_empty = n_listed = 0
    for u in c.users.values():
        if u.uid in listed:
            n_listed += 1
            u = replace(u, user_class=UserClass.REMOVED)
        elif u.uid not in authors:
            n_empty += 1
            u = replace(u, user_class=UserClass.REMOVED)
        users.append(u)
    return c.with_users(users), RemovalReport(no_tweets=n_empty, listed=n_listed, unknown_ids=unknown)


class _IdMapper:
    def __init__(self, mode: str, key: bytes | None):
        if mode not in ("random", "keyed"):
            raise ValueError(f"unknown anonymization mode {mode!r}")
        if mode == "keyed" and not key:
            raise ValueError("keyed anonymization needs a non-empty key")
        self.mode = mode
        self.key = key
        self.table: dict[tuple[str, str], str] = {}

    def __call__(self, kind: str, old: str) -> str:
        k = (kind, old)
        new = self.table.get(k)
        if new is None:
            if self.mode == "random":
                new = str(uuid.uuid4())
            else:
                digest = hmac.new(self.key, f"{kind}:{old}".encode(), hashlib.sha256).digest()
                new = str(uuid.UUID(bytes=digest[:16], version=4))
            self.table[k] = new
        return new


def anonymize(c: Corpus, mode: str = "random", key: bytes | str | None = None) -> Corpus:
    """Replace every tweet and user id with a 128-bit UUID, remapping all references.

    Random mode keeps no mapping once it returns. Keyed mode derives ids with
    HMAC-SHA256 so the same key reproduces the same output.
    """
    if isinstance(key, str):
        key = key.encode()
    m = _IdMapper(mode, key)
    uid = lambda x: m("u", x)  # noqa: E731
    tid = lambda x: m("t", x)  # noqa: E731
    tweets = [
        replace(t, tid=tid(t.tid), author_uid=uid(t.author_uid),
                ref_tid=None if t.ref_tid is None else tid(t.ref_tid))
        for t in c.tweets.values()
    ]
    users = [
        replace(u, uid=uid(u.uid),
                followers=frozenset(uid(x) for x in u.followers),
                followings=frozenset(uid(x) for x in u.followings))
        for u in c.users.values()
    ]
    out = Corpus(
        tweets={t.tid: t for t in tweets},
        users={u.uid: u for u in users},
        window=c.window,
        dangling=frozenset(tid(x) for x in c.dangling),
    )
    m.table.clear()
    return out


# --- persistence ------------------------------------------------------------------

def write_corpus(c: Corpus, out_dir: str | Path) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / TWEETS_FILE, "w", encoding="utf-8") as fh:
        for t in c.tweets.values():
            fh.write(json.dumps(tweet_to_record(t), ensure_ascii=False, sort_keys=True) + "\n")
    with open(out / USERS_FILE, "w", encoding="utf-8") as fh:
        for u in c.users.values():
            fh.write(json.dumps(user_to_record(u), ensure_ascii=False, sort_keys=True) + "\n")
    meta = {"window": list(c.window), "dangling": sorted(c.dangling)}
    (out / META_FILE).write_text(json.dumps(meta, indent=1, sort_keys=True) + "\n")
    return out


def read_corpus(corpus_dir: str | Path) -> Corpus:
    d = Path(corpus_dir)
    if not (d / TWEETS_FILE).exists():
        raise DataError(f"{d} is not a corpus directory (no {TWEETS_FILE})")
    window = DEFAULT_WINDOW_SECONDS
    dangling: frozenset[str] = frozenset()
    if (d / META_FILE).exists():
        meta = json.loads((d / META_FILE).read_text())
        window = tuple(meta["window"])
        dangling = frozenset(meta.get("dangling", ()))
    users_path = d / USERS_FILE if (d / USERS_FILE).exists() else None
    c, report = ingest_tweets(d / TWEETS_FILE, window, users_path)
    if report.skipped or report.user_malformed:
        raise DataError(f"corpus {d} has {report.skipped + report.user_malformed} invalid records")
    return replace(c, dangling=dangling)
