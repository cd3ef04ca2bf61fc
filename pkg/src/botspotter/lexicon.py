"""Tweet augmentation: text normalization, sentiment, theme hits and the exclusive party label."""
from __future__ import annotations

import json
import re
import unicodedata
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Callable, Iterable, Mapping, Protocol

import yaml

from botspotter.corpus import Corpus, Tweet, root_of
from botspotter.domain import PARTIES, THEMES, TweetType
from botspotter.errors import ConfigError

NEUTRAL = 0.5
VALENCE_RANGE = 5.0

_URL = re.compile(r"(?:https?://|www\.)\S+", re.IGNORECASE)
# keep word characters plus the marks that carry meaning in tweets
_SPECIAL = re.compile(r"[^\w#@:\s]+")
_SPACE = re.compile(r"\s+")


@dataclass(frozen=True)
class SentimentLexicon:
    entries: Mapping[str, float]
    emoji_map: Mapping[str, str] = field(default_factory=dict)
    neutral: float = NEUTRAL

    @classmethod
    def from_file(cls, path: str | Path) -> "SentimentLexicon":
        data = _load_structured(path)
        return cls.from_dict(data)

    @classmethod
    def from_dict(cls, data: Mapping) -> "SentimentLexicon":
        try:
            raw = data["valences"]
            emoji = data.get("emoji", {})
        except (KeyError, TypeError, AttributeError) as exc:
            raise ConfigError("lexicon needs a 'valences' table") from exc
        emoji = {unicodedata.normalize("NFKC", k): v for k, v in emoji.items()}
        entries = {}
        for token, val in raw.items():
            val = float(val)
            if not -VALENCE_RANGE <= val <= VALENCE_RANGE:
                raise ConfigError(f"valence of {token!r} outside [-5, 5]")
            entries[normalize_text(token)] = val
        return cls(entries=entries, emoji_map=emoji)


@dataclass(frozen=True)
class BagOfWords:
    name: str
    kind: str
    keywords: frozenset[str]

    def __post_init__(self):
        if self.kind not in ("party", "theme"):
            raise ConfigError(f"bag {self.name}: kind must be party or theme")
        if not self.keywords or not all(self.keywords):
            raise ConfigError(f"bag {self.name}: keywords must be non-empty")

    def hits(self, text: str) -> bool:
        return any(w in text for w in self.keywords)


@dataclass(frozen=True)
class MatchConfig:
    party_bags: tuple[BagOfWords, ...]
    theme_bags: tuple[BagOfWords, ...]
    lexicon: SentimentLexicon

    def __post_init__(self):
        if tuple(b.name for b in self.party_bags) != PARTIES:
            raise ConfigError(f"party bags must be exactly {PARTIES} in that order")
        if tuple(b.name for b in self.theme_bags) != THEMES:
            raise ConfigError(f"theme bags must be exactly {THEMES} in that order")


class SentimentScorer(Protocol):
    def __call__(self, text: str) -> float: ...


def _load_structured(path: str | Path):
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {p}: {exc}") from exc
    if p.suffix == ".json":
        return json.loads(text)
    return yaml.safe_load(text)


def load_bags(path: str | Path | None = None) -> tuple[tuple[BagOfWords, ...], tuple[BagOfWords, ...]]:
    """Read `{parties: {name: [kw...]}, themes: {name: [kw...]}}`; default is the packaged list."""
    if path is None:
        data = yaml.safe_load(resources.files("botspotter.data").joinpath("bags.yaml").read_text("utf-8"))
    else:
        data = _load_structured(path)
    try:
        parties = data["parties"]
        themes = data["themes"]
    except (KeyError, TypeError) as exc:
        raise ConfigError("bags file needs 'parties' and 'themes' sections") from exc
    missing = [n for n in PARTIES if n not in parties] + [n for n in THEMES if n not in themes]
    if missing:
        raise ConfigError(f"bags file lacks {missing}")
    extra = (set(parties) - set(PARTIES)) | (set(themes) - set(THEMES))
    if extra:
        raise ConfigError(f"bags file has unknown bags {sorted(extra)}")

    def mk(name, kind, kws):
        return BagOfWords(name, kind, frozenset(normalize_text(k) for k in kws))

    return (
        tuple(mk(n, "party", parties[n]) for n in PARTIES),
        tuple(mk(n, "theme", themes[n]) for n in THEMES),
    )


def load_lexicon(path: str | Path | None = None) -> SentimentLexicon:
    if path is None:
        data = json.loads(resources.files("botspotter.data").joinpath("lexicon.json").read_text("utf-8"))
        return SentimentLexicon.from_dict(data)
    return SentimentLexicon.from_file(path)


def load_match_config(bags: str | Path | None = None, lexicon: str | Path | None = None) -> MatchConfig:
    party_bags, theme_bags = load_bags(bags)
    return MatchConfig(party_bags, theme_bags, load_lexicon(lexicon))


def normalize_text(raw: str, emoji_map: Mapping[str, str] | None = None) -> str:
    """Case-fold, NFKC-normalize, spell out mapped emoji, drop URLs and special characters."""
    if not raw:
        return ""
    s = unicodedata.normalize("NFKC", raw)
    if emoji_map:
        for emo in sorted(emoji_map, key=len, reverse=True):
            if emo in s:
                s = s.replace(emo, f" {emoji_map[emo]} ")
    s = _URL.sub(" ", s)
    s = "".join(" " if unicodedata.category(ch)[0] == "C" else ch for ch in s)
    s = _SPECIAL.sub(" ", s.casefold())
    return _SPACE.sub(" ", s).strip()


def score_sentiment(text: str, lex: SentimentLexicon) -> float:
    """Mean valence of lexicon tokens, mapped linearly from [-5, 5] onto [0, 1] and clamped."""
    vals = []
    for tok in text.split():
        v = lex.entries.get(tok)
        if v is None:
            v = lex.entries.get(tok.strip("#@:"))
        if v is not None:
            vals.append(v)
    if not vals:
        return lex.neutral
    mean = sum(vals) / len(vals)
    return min(1.0, max(0.0, (mean + VALENCE_RANGE) / (2 * VALENCE_RANGE)))


class LexiconScorer:
    """Default sentiment port: normalize with the lexicon's emoji map, then score."""

    def __init__(self, lexicon: SentimentLexicon):
        self.lexicon = lexicon

    def __call__(self, text: str) -> float:
        return score_sentiment(normalize_text(text, self.lexicon.emoji_map), self.lexicon)


def match_theme_bags(text: str, theme_bags: Iterable[BagOfWords]) -> dict[str, bool]:
    return {b.name: b.hits(text) for b in theme_bags}


def match_party_exclusive(text: str, party_bags: Iterable[BagOfWords]) -> str | None:
    hit = [b.name for b in party_bags if b.hits(text)]
    return hit[0] if len(hit) == 1 else None


def _matching_text(c: Corpus, t: Tweet) -> str:
    if t.type is TweetType.RETWEET:
        root = root_of(c, t)
        if root is not None:
            return root.text
    return t.text


def propagate_retweet_sentiment(c: Corpus, scorer: Callable[[str], float] | None = None) -> Corpus:
    """Give every resolvable retweet the sentiment of the tweet it (transitively) retweets.

    Dangling retweets keep their own score, computing it with `scorer` if absent.
    """
    out = []
    for t in c.tweets.values():
        if t.type is TweetType.RETWEET:
            root = root_of(c, t)
            if root is not None and root.sentiment is not None:
                t = replace(t, sentiment=root.sentiment)
            elif t.sentiment is None and scorer is not None:
                t = replace(t, sentiment=scorer(t.text))
        out.append(t)
    return c.with_tweets(out)


def augment(c: Corpus, cfg: MatchConfig, scorer: Callable[[str], float] | None = None) -> Corpus:
    """Score every tweet, propagate retweet sentiment, then attach theme hits and party label."""
    scorer = scorer or LexiconScorer(cfg.lexicon)
    # phase 1: own-text scores; must finish before propagation reads the roots
    scored = c.with_tweets(replace(t, sentiment=float(scorer(t.text))) for t in c.tweets.values())
    scored = propagate_retweet_sentiment(scored)
    out = []
    emoji = cfg.lexicon.emoji_map
    for t in scored.tweets.values():
        text = normalize_text(_matching_text(scored, t), emoji)
        themes = match_theme_bags(text, cfg.theme_bags)
        out.append(replace(
            t,
            theme_hits=frozenset(g for g, hit in themes.items() if hit),
            party_label=match_party_exclusive(text, cfg.party_bags),
        ))
    return scored.with_tweets(out)
