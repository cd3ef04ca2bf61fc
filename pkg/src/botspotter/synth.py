"""Seeded synthetic corpora with planted structure, for desk-scale end-to-end runs.

A scenario plants five party-aligned bot groups whose tweets praise their own party and
attack the others, a pool of manually labeled partisan humans with the same behaviour
(the training set), ordinary humans and uncertain users tweeting about anything, and
bot scores laid out so the percentile gate separates the roles exactly when the bot
share is 5% and the uncertain share is 20% of the scored users.
"""
from __future__ import annotations

import csv
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Sequence

import numpy as np
import yaml

from botspotter.corpus import Corpus, Tweet, User, parse_window, write_corpus
from botspotter.domain import PARTIES, THEMES, DEFAULT_WINDOW, TweetType
from botspotter.errors import ConfigError
from botspotter.lexicon import load_bags, load_lexicon

ROLES = ("bot", "labeled", "human", "uncertain", "silent")
TRUTH_FILE = "truth.csv"
SCORES_FILE = "scores.csv"

# Plain campaign vocabulary that hits no bag and no lexicon entry.
FILLER = ("hoy", "votar", "campaña", "mitin", "programa", "candidato", "encuesta",
          "escaños", "calle", "gente", "país", "congreso", "noticia", "semana")


@dataclass(frozen=True)
class TypeMix:
    original: float = 0.3
    retweet: float = 0.45
    reply: float = 0.15
    quote: float = 0.1

    def probs(self) -> np.ndarray:
        p = np.array([self.original, self.retweet, self.reply, self.quote], dtype=float)
        if np.any(p < 0) or p.sum() <= 0:
            raise ConfigError("tweet type mix needs non-negative weights")
        return p / p.sum()


@dataclass(frozen=True)
class Scenario:
    bots_per_party: int = 200
    labeled_per_party: int = 200
    bot_share: float = 0.05
    uncertain_share: float = 0.20
    silent_users: int = 50
    bot_tweets: tuple[int, int] = (8, 16)
    labeled_tweets: tuple[int, int] = (8, 16)
    other_tweets: tuple[int, int] = (1, 2)
    bias: float = 0.3
    noise: float = 0.1
    own_party_share: float = 0.5
    partisan_share: float = 0.5
    theme_rate: float = 1.0  # expected theme hashtags per tweet
    intra_follow: float = 0.05
    inter_follow: float = 0.002
    human_follows: int = 3
    dangling_share: float = 0.02
    window: tuple[str, str] = DEFAULT_WINDOW
    partisan_mix: TypeMix = field(default_factory=TypeMix)
    other_mix: TypeMix = field(default_factory=lambda: TypeMix(0.45, 0.4, 0.1, 0.05))

    def __post_init__(self):
        if self.bots_per_party < 1 or self.labeled_per_party < 0:
            raise ConfigError("bots_per_party must be >= 1 and labeled_per_party >= 0")
        if not 0 < self.bot_share < 1 or not 0 <= self.uncertain_share < 1 - self.bot_share:
            raise ConfigError("bot_share and uncertain_share must leave room for humans")
        for name in ("bot_tweets", "labeled_tweets", "other_tweets"):
            lo, hi = getattr(self, name)
            if not 1 <= lo <= hi:
                raise ConfigError(f"{name} must be an increasing pair of positive counts")
        if not 0 <= self.bias <= 0.5 or self.noise < 0:
            raise ConfigError("bias must lie in [0, 0.5] and noise must be >= 0")

    @property
    def n_bots(self) -> int:
        return self.bots_per_party * len(PARTIES)

    @property
    def n_scored(self) -> int:
        return int(round(self.n_bots / self.bot_share))

    @property
    def n_uncertain(self) -> int:
        return int(round(self.n_scored * self.uncertain_share))

    @property
    def n_humans(self) -> int:
        n = self.n_scored - self.n_bots - self.n_uncertain - self.labeled_per_party * len(PARTIES)
        if n < 0:
            raise ConfigError("too many labeled users for the requested bot share")
        return n

    def to_dict(self) -> dict:
        d = asdict(self)
        for k, v in d.items():
            if isinstance(v, tuple):
                d[k] = list(v)
        return d


def load_scenario(path: str | Path | None = None, **overrides) -> Scenario:
    data = {}
    if path is not None:
        try:
            data = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
        except (OSError, yaml.YAMLError) as exc:
            raise ConfigError(f"cannot read scenario {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"scenario {path} must be a mapping")
    data.update(overrides)
    known = {f.name for f in fields(Scenario)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"unknown scenario keys {unknown}")
    for k in ("bot_tweets", "labeled_tweets", "other_tweets", "window"):
        if k in data:
            data[k] = tuple(data[k])
    for k in ("partisan_mix", "other_mix"):
        if k in data and isinstance(data[k], dict):
            data[k] = TypeMix(**data[k])
    try:
        return Scenario(**data)
    except TypeError as exc:
        raise ConfigError(f"bad scenario: {exc}") from exc


@dataclass
class Truth:
    role: dict[str, str]
    party: dict[str, str | None]

    def bots(self) -> list[str]:
        return [u for u, r in self.role.items() if r == "bot"]

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["uid", "role", "party"])
            for uid in sorted(self.role):
                w.writerow([uid, self.role[uid], self.party.get(uid) or ""])

    @classmethod
    def read_csv(cls, path: str | Path) -> "Truth":
        role, party = {}, {}
        with open(path, newline="", encoding="utf-8") as fh:
            for row in csv.DictReader(fh):
                role[row["uid"]] = row["role"]
                party[row["uid"]] = row["party"] or None
        return cls(role, party)


class _TextMaker:
    def __init__(self, rng: np.random.Generator):
        self.rng = rng
        party_bags, theme_bags = load_bags()
        lex = load_lexicon()
        self.party_kw = {b.name: sorted(b.keywords) for b in party_bags}
        self.theme_tags = {b.name: sorted(k for k in b.keywords if k.startswith("#")) for b in theme_bags}
        emoji_for = {}
        for emo, name in sorted(lex.emoji_map.items()):
            emoji_for.setdefault(name, emo)
        self.tokens = sorted(lex.entries.items(), key=lambda kv: (kv[1], kv[0]))
        self.emoji_for = emoji_for

    def _pick(self, seq):
        return seq[int(self.rng.integers(len(seq)))]

    def sentiment_words(self, target: float) -> list[str]:
        """One or two lexicon words whose valences sit within one point of the target."""
        v = 10.0 * float(np.clip(target, 0.0, 1.0)) - 5.0
        near = [w for w, val in self.tokens if abs(val - v) <= 1.0]
        if not near:
            near = [min(self.tokens, key=lambda kv: (abs(kv[1] - v), kv[0]))[0]]
        out = []
        for _ in range(1 + int(self.rng.random() < 0.5)):
            w = self._pick(near)
            out.append(self.emoji_for.get(w, w) if w.startswith(":") else w)
        return out

    def text(self, party: str | None, sentiment: float | None, theme_rate: float) -> str:
        parts = [self._pick(FILLER)]
        if party is not None:
            parts.append(self._pick(self.party_kw[party]))
        if sentiment is not None:
            parts += self.sentiment_words(sentiment)
        for g in THEMES:
            if self.rng.random() < theme_rate / len(THEMES):
                parts.append(self._pick(self.theme_tags[g]))
        parts.append(self._pick(FILLER))
        order = self.rng.permutation(len(parts))
        return " ".join(parts[i] for i in order)


def _uniform_ints(rng, lo_hi: tuple[int, int], n: int) -> np.ndarray:
    lo, hi = lo_hi
    return rng.integers(lo, hi + 1, n)


def generate_synthetic_corpus(scenario: Scenario = Scenario(), seed: int = 0) -> tuple[Corpus, Truth]:
    """Raw (un-augmented, un-gated) corpus plus the planted roles and parties."""
    rng = np.random.default_rng(seed)
    maker = _TextMaker(rng)
    lo, hi = parse_window(*scenario.window)

    role: dict[str, str] = {}
    party: dict[str, str | None] = {}
    uid_n = 0

    def new_uid(r: str, p: str | None) -> str:
        nonlocal uid_n
        uid = f"u{uid_n:06d}"
        uid_n += 1
        role[uid], party[uid] = r, p
        return uid

    bots_by_party = {p: [new_uid("bot", p) for _ in range(scenario.bots_per_party)] for p in PARTIES}
    labeled_by_party = {p: [new_uid("labeled", p) for _ in range(scenario.labeled_per_party)] for p in PARTIES}
    humans = [new_uid("human", None) for _ in range(scenario.n_humans)]
    uncertain = [new_uid("uncertain", None) for _ in range(scenario.n_uncertain)]
    for _ in range(scenario.silent_users):
        new_uid("silent", None)

    # Disjoint score bands put the 75th/95th percentiles exactly between the roles.
    band = {"human": (0.01, 0.40), "labeled": (0.01, 0.40), "silent": (0.01, 0.40),
            "uncertain": (0.45, 0.85), "bot": (0.88, 0.99)}
    scores = {uid: float(np.round(rng.uniform(*band[r]), 6)) for uid, r in role.items()}

    # Active period: bots emerge at different days; everybody else spans the window.
    span = hi - lo
    start = {}
    for uid, r in role.items():
        start[uid] = lo + int(rng.integers(0, int(span * 0.6))) if r == "bot" else lo

    tweets: list[Tweet] = []
    tid_n = 0

    def new_tid() -> str:
        nonlocal tid_n
        tid_n += 1
        return f"t{tid_n:07d}"

    def ts_after(uid: str, floor: int = lo) -> int:
        a = max(start[uid], floor)
        return int(rng.integers(a, hi + 1))

    def planted_stance(uid: str) -> tuple[str | None, float | None]:
        p = party[uid]
        if p is not None:
            if rng.random() < scenario.own_party_share:
                return p, 0.5 + scenario.bias + rng.normal(0, scenario.noise)
            other = [q for q in PARTIES if q != p]
            return other[int(rng.integers(len(other)))], 0.5 - scenario.bias + rng.normal(0, scenario.noise)
        if rng.random() < scenario.partisan_share:
            return PARTIES[int(rng.integers(len(PARTIES)))], float(rng.uniform(0.05, 0.95))
        return None, (float(rng.uniform(0.1, 0.9)) if rng.random() < 0.5 else None)

    # Pass 1: originals, pooled by (party, praise/attack) so partisans can amplify them.
    partisans = [u for g in (bots_by_party, labeled_by_party) for p in PARTIES for u in g[p]]
    others = humans + uncertain
    n_tweets = {}
    for uid in partisans:
        lim = scenario.bot_tweets if role[uid] == "bot" else scenario.labeled_tweets
        n_tweets[uid] = int(_uniform_ints(rng, lim, 1)[0])
    for uid in others:
        n_tweets[uid] = int(_uniform_ints(rng, scenario.other_tweets, 1)[0])

    mixes = {"partisan": scenario.partisan_mix.probs(), "other": scenario.other_mix.probs()}
    plan = {}
    for uid in partisans + others:
        probs = mixes["other" if party[uid] is None else "partisan"]
        plan[uid] = rng.choice(4, size=n_tweets[uid], p=probs)
        # every account posts at least one original so the pools never run dry
        plan[uid][0] = 0

    pools: dict[tuple[str, bool], list[Tweet]] = {(p, s): [] for p in PARTIES for s in (True, False)}
    all_originals: list[Tweet] = []
    for uid in partisans + others:
        for kind in plan[uid]:
            if kind != 0:
                continue
            p, s = planted_stance(uid)
            t = Tweet(new_tid(), TweetType.ORIGINAL, ts_after(uid), uid, maker.text(p, s, scenario.theme_rate))
            tweets.append(t)
            all_originals.append(t)
            if p is not None and s is not None:
                pools[(p, s >= 0.5)].append(t)

    # Pass 2: interactions.
    types = (TweetType.ORIGINAL, TweetType.RETWEET, TweetType.REPLY, TweetType.QUOTE)
    n_dangling = 0
    for uid in partisans + others:
        for kind in plan[uid]:
            if kind == 0:
                continue
            ty = types[kind]
            p, s = planted_stance(uid)
            if party[uid] is not None and p is not None:
                pool = pools[(p, s >= 0.5)] or all_originals
            else:
                pool = all_originals
            target = pool[int(rng.integers(len(pool)))]
            if ty is TweetType.RETWEET:
                if party[uid] is None and rng.random() < scenario.dangling_share:
                    n_dangling += 1
                    tweets.append(Tweet(new_tid(), ty, ts_after(uid), uid,
                                        maker.text(p, s, scenario.theme_rate), ref_tid=f"tx{n_dangling:06d}"))
                    continue
                tweets.append(Tweet(new_tid(), ty, ts_after(uid, target.timestamp), uid, target.text,
                                    ref_tid=target.tid))
            else:
                tweets.append(Tweet(new_tid(), ty, ts_after(uid, target.timestamp), uid,
                                    maker.text(p, s, scenario.theme_rate), ref_tid=target.tid))

    # Friendships: dense inside each bot group, sparse across groups and for everyone else.
    follow: dict[str, set[str]] = {uid: set() for uid in role}
    bot_list = [u for p in PARTIES for u in bots_by_party[p]]
    bot_party = np.array([PARTIES.index(party[u]) for u in bot_list])
    same = bot_party[:, None] == bot_party[None, :]
    prob = np.where(same, scenario.intra_follow, scenario.inter_follow)
    hit = rng.random(prob.shape) < prob
    np.fill_diagonal(hit, False)
    for i, j in zip(*np.nonzero(hit)):
        follow[bot_list[i]].add(bot_list[j])
    everyone = list(role)
    for uid in everyone:
        if role[uid] == "bot":
            continue
        for j in rng.integers(0, len(everyone), scenario.human_follows):
            if everyone[j] != uid:
                follow[uid].add(everyone[j])
    followers: dict[str, set[str]] = {uid: set() for uid in role}
    for a, outs in follow.items():
        for b in outs:
            followers[b].add(a)

    users = {
        uid: User(uid=uid, bot_score=scores[uid], followers=frozenset(followers[uid]),
                  followings=frozenset(follow[uid]),
                  manual_party=party[uid] if role[uid] == "labeled" else None)
        for uid in role
    }
    corpus = Corpus(tweets={t.tid: t for t in tweets}, users=users, window=(lo, hi))
    return corpus, Truth(role, party)


def write_synthetic(out_dir: str | Path, scenario: Scenario, seed: int) -> tuple[Corpus, Truth]:
    """Write the raw corpus, the planted truth and a uid,score file for the score provider."""
    c, truth = generate_synthetic_corpus(scenario, seed)
    out = write_corpus(c, out_dir)
    truth.write_csv(out / TRUTH_FILE)
    with open(out / SCORES_FILE, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["uid", "score"])
        for uid, u in c.users.items():
            w.writerow([uid, repr(u.bot_score)])
    return c, truth


def separable_training_set(n_per_class: int = 200, n_features: int = 120, separation: float = 12.0,
                           sigma: float = 0.05, seed: int = 0,
                           classes: Sequence[str] = PARTIES) -> tuple[np.ndarray, list[str]]:
    """Gaussian clusters around random corner-like centers.

    Centers are 0.5 + s_k * a with random sign vectors s_k, and `a` chosen so the closest
    pair of centers lies exactly `separation` * sigma apart.
    """
    rng = np.random.default_rng(seed)
    k = len(classes)
    signs = rng.choice([-1.0, 1.0], (k, n_features))
    gaps = np.sqrt(((signs[:, None] - signs[None]) ** 2).sum(-1))
    min_gap = gaps[~np.eye(k, dtype=bool)].min()
    if min_gap == 0:
        raise ValueError("two classes drew identical sign patterns; use another seed")
    centers = 0.5 + signs * (separation * sigma / min_gap)
    X = np.vstack([centers[c] + rng.normal(0.0, sigma, (n_per_class, n_features)) for c in range(k)])
    y = [classes[c] for c in range(k) for _ in range(n_per_class)]
    return X, y
