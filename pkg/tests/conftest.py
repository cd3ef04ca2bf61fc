from __future__ import annotations

from pathlib import Path

import pytest

from botspotter.corpus import Corpus, Tweet, User, remove_unusable_users, resolve_references
from botspotter.domain import DEFAULT_WINDOW, TweetType
from botspotter.corpus import parse_window
from botspotter.gate import gate
from botspotter.lexicon import augment, load_match_config
from botspotter.synth import load_scenario, generate_synthetic_corpus

ROOT = Path(__file__).resolve().parents[1]
CONFIGS = ROOT / "configs"
WINDOW = parse_window(*DEFAULT_WINDOW)
T0 = WINDOW[0]
DAY = 86400


def tw(tid, kind="original", ts=T0, author="a", text="", ref=None, sentiment=None,
       themes=(), party=None) -> Tweet:
    return Tweet(tid=tid, type=TweetType(kind), timestamp=ts, author_uid=author, text=text,
                 ref_tid=ref, sentiment=sentiment, theme_hits=frozenset(themes), party_label=party)


def corpus_of(tweets, users=None, window=WINDOW) -> Corpus:
    tweets = list(tweets)
    users = {u.uid: u for u in (users or [])}
    for t in tweets:
        users.setdefault(t.author_uid, User(uid=t.author_uid))
    return Corpus(tweets={t.tid: t for t in tweets}, users=users, window=window)


def prepare(c: Corpus) -> Corpus:
    """Resolve, drop silent users, augment with the packaged bags, gate on stored scores."""
    c, _ = resolve_references(c)
    c, _ = remove_unusable_users(c)
    c = augment(c, load_match_config())
    c, _, _ = gate(c)
    return c


@pytest.fixture(scope="session")
def small_scenario():
    return load_scenario(CONFIGS / "scenario_small.yaml")


@pytest.fixture(scope="session")
def small_world(small_scenario):
    raw, truth = generate_synthetic_corpus(small_scenario, seed=3)
    return prepare(raw), truth


# one line per acceptance criterion, filled by test_acceptance and echoed after the run
ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
