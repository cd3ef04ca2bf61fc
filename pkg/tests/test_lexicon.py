import json

import pytest
from hypothesis import given, settings, strategies as st

from botspotter.domain import PARTIES, THEMES
from botspotter.errors import ConfigError
from botspotter.lexicon import (
    BagOfWords, LexiconScorer, SentimentLexicon, augment, load_bags, load_lexicon,
    load_match_config, match_party_exclusive, match_theme_bags, normalize_text,
    propagate_retweet_sentiment, score_sentiment,
)

from conftest import corpus_of, tw

EMOJI = {"😀": ":smile:"}


@pytest.fixture(scope="module")
def cfg():
    return load_match_config()


@pytest.fixture(scope="module")
def lex():
    return SentimentLexicon.from_dict({"valences": {"bueno": 2, "malo": -2, "genial": 5, "excelente": 5,
                                                    ":smile:": 3}, "emoji": EMOJI})


class TestNormalize:
    def test_emoji_and_punctuation(self):
        assert normalize_text("VOX!!! 😀", EMOJI) == "vox :smile:"

    def test_empty(self):
        assert normalize_text("") == ""

    def test_url_removed_hashtag_kept(self):
        raw = "Visita http://x.y #Cataluña"
        # hand normalization: drop URL, casefold, keep '#', collapse spaces
        expected = " ".join(w.casefold() for w in raw.split() if not w.startswith("http"))
        assert normalize_text(raw) == expected == "visita #cataluña"

    def test_control_characters_and_width_forms(self):
        assert normalize_text("ＶＯＸ\u0007\ttexto\n") == "vox texto"

    @settings(max_examples=200)
    @given(st.text())
    def test_idempotent_and_trimmed(self, s):
        n = normalize_text(s, EMOJI)
        assert normalize_text(n, EMOJI) == n
        assert n == n.strip() and "  " not in n


class TestScore:
    def test_neutral_without_tokens(self, lex):
        assert score_sentiment("nada que ver", lex) == 0.5

    def test_saturates_at_one(self, lex):
        assert score_sentiment("genial excelente", lex) == 1.0

    def test_symmetric_tokens_cancel(self, lex):
        assert score_sentiment("bueno malo", lex) == 0.5

    def test_hashtag_and_emoji_tokens(self, lex):
        assert score_sentiment("#bueno", lex) == pytest.approx(0.7)
        assert LexiconScorer(lex)("😀") == pytest.approx(0.8)

    @settings(max_examples=200)
    @given(st.lists(st.sampled_from(["bueno", "malo", "genial", "otra", "#malo", ":smile:"]), max_size=12))
    def test_range_and_oracle(self, lex, toks):
        s = score_sentiment(" ".join(toks), lex)
        vals = [lex.entries[t.strip("#@:")] if t.strip("#@:") in lex.entries else lex.entries.get(t)
                for t in toks]
        vals = [v for v in vals if v is not None]
        expected = 0.5 if not vals else min(1.0, max(0.0, (sum(vals) / len(vals) + 5) / 10))
        assert 0.0 <= s <= 1.0 and s == pytest.approx(expected, abs=1e-12)

    def test_lexicon_validation(self):
        with pytest.raises(ConfigError):
            SentimentLexicon.from_dict({"valences": {"x": 9}})


class TestBags:
    def test_default_bags_have_canonical_names(self):
        parties, themes = load_bags()
        assert tuple(b.name for b in parties) == PARTIES
        assert tuple(b.name for b in themes) == THEMES
        assert all(b.keywords for b in parties + themes)

    def test_bags_are_normalized_like_text(self):
        parties, _ = load_bags()
        pp = next(b for b in parties if b.name == "PP")
        assert pp.hits(normalize_text("#PorTodoLoQueNosUne"))

    def test_bad_bag_files(self, tmp_path):
        p = tmp_path / "b.json"
        p.write_text(json.dumps({"parties": {n: ["x"] for n in PARTIES}}))
        with pytest.raises(ConfigError):
            load_bags(p)
        p.write_text(json.dumps({"parties": {**{n: ["x"] for n in PARTIES}, "GREEN": ["g"]},
                                 "themes": {n: ["y"] for n in THEMES}}))
        with pytest.raises(ConfigError):
            load_bags(p)
        with pytest.raises(ConfigError):
            BagOfWords("UP", "party", frozenset())

    def test_themes_inclusive(self, cfg):
        hits = match_theme_bags(normalize_text("vergüenza #ExhumacionFranco"), cfg.theme_bags)
        assert hits == {g: g == "Exhumation" for g in THEMES}
        both = match_theme_bags(normalize_text("#Debate4N y #10N"), cfg.theme_bags)
        assert both["Debate"] and both["Election"]
        assert not any(match_theme_bags("nada", cfg.theme_bags).values())

    def test_party_exclusive(self, cfg):
        assert match_party_exclusive(normalize_text("Pablo Casado en campaña"), cfg.party_bags) == "PP"
        assert match_party_exclusive(normalize_text("Casado y Abascal: #PartidoPopular #VOX"),
                                     cfg.party_bags) is None
        assert match_party_exclusive("", cfg.party_bags) is None

    @settings(max_examples=100)
    @given(st.lists(st.sampled_from(range(len(PARTIES))), max_size=4))
    def test_exclusivity_property(self, cfg, picks):
        text = " ".join(sorted(next(iter(cfg.party_bags[i].keywords)) for i in picks))
        firing = {b.name for b in cfg.party_bags if b.hits(text)}
        label = match_party_exclusive(text, cfg.party_bags)
        assert label == (next(iter(firing)) if len(firing) == 1 else None)


class TestRetweets:
    def test_retweet_inherits_original(self):
        c = corpus_of([tw("o", sentiment=0.8), tw("r", "retweet", ref="o", sentiment=0.1)])
        assert propagate_retweet_sentiment(c).tweets["r"].sentiment == 0.8

    def test_dangling_retweet_scored_from_own_text(self, lex):
        c = corpus_of([tw("r", "retweet", ref="gone", text="RT genial")])
        out = propagate_retweet_sentiment(c, LexiconScorer(lex))
        assert out.tweets["r"].sentiment == 1.0

    def test_fixed_point_after_rescoring(self):
        c = corpus_of([tw("o", sentiment=0.2), tw("r1", "retweet", ref="o"), tw("r2", "retweet", ref="r1")])
        c = propagate_retweet_sentiment(c)
        rescored = c.with_tweets([*(t for t in c.tweets.values() if t.tid != "o"), tw("o", sentiment=0.9)])
        again = propagate_retweet_sentiment(rescored)
        assert again.tweets["r1"].sentiment == again.tweets["r2"].sentiment == 0.9
        assert propagate_retweet_sentiment(again).tweets == again.tweets


class TestAugment:
    def fixture(self):
        return corpus_of([
            tw("o", text="¡Bravo Pedro Sánchez! #Debate4N 👏"),
            tw("r", "retweet", author="b", ref="o", text="RT otra cosa de VOX"),
            tw("q", "quote", author="b", ref="o", text="Vergüenza, Albert Rivera"),
            tw("m", text="PSOE y Partido Popular, lo mismo"),
            tw("d", "retweet", author="c", ref="gone", text="RT odio a VOX"),
        ])

    def test_labels_and_inheritance(self, cfg):
        out = augment(self.fixture(), cfg).tweets
        assert out["o"].party_label == "PSOE" and out["o"].theme_hits == {"Debate"}
        assert out["o"].sentiment > 0.5
        # retweets match on the original's text and inherit its score
        assert out["r"].party_label == "PSOE" and out["r"].sentiment == out["o"].sentiment
        assert out["r"].theme_hits == {"Debate"}
        # quotes keep their own text
        assert out["q"].party_label == "CS" and out["q"].sentiment < 0.5
        assert out["m"].party_label is None
        assert out["d"].party_label == "VOX" and out["d"].sentiment == 0.0

    def test_deterministic(self, cfg):
        assert augment(self.fixture(), cfg).tweets == augment(self.fixture(), cfg).tweets

    def test_custom_scorer_port(self, cfg):
        out = augment(self.fixture(), cfg, scorer=lambda text: 0.25)
        assert {t.sentiment for t in out.tweets.values()} == {0.25}

    def test_default_lexicon_loads(self):
        lex = load_lexicon()
        assert all(-5 <= v <= 5 for v in lex.entries.values()) and lex.neutral == 0.5
