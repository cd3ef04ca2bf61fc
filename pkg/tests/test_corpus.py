import json
import uuid

import pytest
from hypothesis import given, settings, strategies as st

from botspotter.corpus import (
    Tweet, User, anonymize, ingest_tweets, parse_timestamp, parse_window, read_corpus,
    remove_unusable_users, resolve_references, root_of, tweet_to_record, user_to_record,
    write_corpus,
)
from botspotter.domain import TweetType, UserClass
from botspotter.errors import DataError

from conftest import DAY, T0, WINDOW, corpus_of, tw


def write_lines(path, records):
    path.write_text("".join((r if isinstance(r, str) else json.dumps(r)) + "\n" for r in records))
    return path


def rec(tid, ts, kind="original", author="a", ref=None, text="hola"):
    return {"tid": tid, "type": kind, "timestamp": ts, "author_uid": author, "ref_tid": ref, "text": text}


class TestTimestamps:
    def test_formats_agree(self):
        assert parse_timestamp("2019-10-04T00:00:00Z") == T0
        assert parse_timestamp("2019-10-04T02:00:00+02:00") == T0
        assert parse_timestamp("2019-10-04") == T0
        assert parse_timestamp(T0) == T0
        assert parse_timestamp(str(T0)) == T0

    @pytest.mark.parametrize("bad", ["", "yesterday", None, True, float("nan")])
    def test_rejects_garbage(self, bad):
        with pytest.raises(ValueError):
            parse_timestamp(bad)

    def test_date_only_end_covers_the_day(self):
        lo, hi = parse_window("2019-10-04", "2019-10-04")
        assert hi - lo == DAY - 1

    def test_inverted_window(self):
        with pytest.raises(DataError):
            parse_window("2019-11-01", "2019-10-01")


class TestIngest:
    def test_window_boundary_counts_skips(self, tmp_path):
        p = write_lines(tmp_path / "t.jsonl", [
            rec("1", T0), rec("2", T0 + 10), rec("3", WINDOW[1]), rec("4", WINDOW[1] + 1)])
        c, r = ingest_tweets(p, WINDOW)
        assert sorted(c.tweets) == ["1", "2", "3"]
        assert r.out_of_window == 1 and r.skipped == 1

    def test_empty_file(self, tmp_path):
        c, r = ingest_tweets(write_lines(tmp_path / "t.jsonl", []), WINDOW)
        assert not c.tweets and not c.users and r.lines == 0

    def test_malformed_and_duplicate_lines_are_counted(self, tmp_path):
        p = write_lines(tmp_path / "t.jsonl", [
            rec("1", T0), "{not json", rec("1", T0 + 5), {"tid": "x"},
            rec("2", T0, kind="retweet"),            # retweet without a reference
            rec("3", T0, kind="original", ref="1"),  # original with a reference
            [1, 2]])
        c, r = ingest_tweets(p, WINDOW)
        assert list(c.tweets) == ["1"]
        assert (r.malformed, r.duplicate) == (5, 1)

    def test_missing_file_is_a_data_error(self, tmp_path):
        with pytest.raises(DataError):
            ingest_tweets(tmp_path / "nope.jsonl", WINDOW)

    def test_retweet_of_in_window_original_resolves(self, tmp_path):
        p = write_lines(tmp_path / "t.jsonl", [rec("o", T0), rec("r", T0 + 1, "retweet", "b", ref="o")])
        c, _ = ingest_tweets(p, WINDOW)
        c, report = resolve_references(c)
        assert set(c.tweets) == {"o", "r"} and set(c.users) == {"a", "b"}
        assert report.resolved == 1 and report.dangling == []
        assert root_of(c, c.tweets["r"]).tid == "o"

    def test_user_sidecar_and_follow_intersection(self, tmp_path):
        t = write_lines(tmp_path / "t.jsonl", [rec("1", T0, author="a")])
        u = write_lines(tmp_path / "u.jsonl", [
            {"uid": "a", "bot_score": 0.3, "followers": ["b", "ghost"], "followings": ["b"],
             "manual_party": "PP"},
            {"uid": "b", "bot_score": 0.9},
            {"uid": "c", "bot_score": 7.0},
        ])
        c, r = ingest_tweets(t, WINDOW, u)
        assert c.users["a"].followers == frozenset({"b"})
        assert c.users["a"].manual_party == "PP"
        assert r.user_malformed == 1 and "c" not in c.users

    def test_extra_fields_pass_through(self, tmp_path):
        p = write_lines(tmp_path / "t.jsonl", [{**rec("1", T0), "favorite_count": 4}])
        c, _ = ingest_tweets(p, WINDOW)
        assert tweet_to_record(c.tweets["1"])["favorite_count"] == 4


class TestReferences:
    def test_dangling_reply_is_reported_not_dropped(self):
        c = corpus_of([tw("o"), tw("r", "reply", ref="missing")])
        c2, report = resolve_references(c)
        assert report.dangling == ["r"] and c2.dangling == frozenset({"r"})
        assert c2.tweets == c.tweets

    def test_chain_quote_retweet_original(self):
        c = corpus_of([tw("o"), tw("r", "retweet", ref="o"), tw("q", "quote", ref="r")])
        _, report = resolve_references(c)
        assert report.resolved == 2

        def chase(tid):  # reference-walking oracle
            seen = [tid]
            while c.tweets[seen[-1]].ref_tid is not None:
                seen.append(c.tweets[seen[-1]].ref_tid)
            return seen
        assert chase("q") == ["q", "r", "o"]

    def test_root_of_stops_on_cycles_and_gaps(self):
        c = corpus_of([tw("r1", "retweet", ref="r2"), tw("r2", "retweet", ref="r1"),
                       tw("r3", "retweet", ref="gone")])
        assert root_of(c, c.tweets["r1"]) is None
        assert root_of(c, c.tweets["r3"]) is None


class TestRemoval:
    def test_user_without_tweets_is_removed(self):
        c = corpus_of([tw("1", author="a")], [User("silent")])
        c, r = remove_unusable_users(c)
        assert c.users["silent"].user_class is UserClass.REMOVED and r.no_tweets == 1

    def test_listed_users_removed_and_unknown_counted(self):
        c = corpus_of([tw("1", author="a"), tw("2", author="b")])
        c, r = remove_unusable_users(c, {"b", "zzz"})
        assert c.users["b"].user_class is UserClass.REMOVED
        assert (r.listed, r.unknown_ids) == (1, 1)

    def test_all_active_is_identity(self):
        c = corpus_of([tw("1", author="a")])
        c2, r = remove_unusable_users(c)
        assert c2.users == c.users and r.no_tweets == r.listed == 0


def structure_hash(c):
    """Id-free canonical form of the (author, type, ref) multigraph."""
    def key(t):
        return (t.timestamp, t.text)
    by_author = c.tweets_by_author()
    out = []
    for t in c.tweets.values():
        ref = c.tweets.get(t.ref_tid)
        out.append((t.type.value, key(t), tuple(sorted(key(x) for x in by_author[t.author_uid])),
                    None if t.ref_tid is None else (key(ref) if ref else "dangling")))
    return hash(tuple(sorted(out, key=repr)))


class TestAnonymize:
    def base(self):
        return corpus_of(
            [tw("1", author="a", ts=T0, text="x"), tw("2", "retweet", author="b", ref="1", ts=T0 + 1, text="y"),
             tw("3", "reply", author="b", ref="ext", ts=T0 + 2, text="z")],
            [User("a", followers=frozenset({"b"})), User("b", followings=frozenset({"a"}))])

    @pytest.mark.parametrize("mode,key", [("random", None), ("keyed", b"k")])
    def test_cardinality_and_no_original_ids(self, mode, key):
        c = self.base()
        out = anonymize(c, mode, key)
        assert len(out.tweets) == 3 and len(out.users) == 2
        old = set(c.tweets) | set(c.users) | {"ext"}
        for t in out.tweets.values():
            assert {t.tid, t.author_uid, t.ref_tid} & old == set()
            uuid.UUID(t.tid)
        for u in out.users.values():
            assert not ({u.uid} | u.followers | u.followings) & old

    def test_references_follow_the_remap(self):
        out = anonymize(self.base(), "keyed", "k")
        rt = next(t for t in out.tweets.values() if t.type is TweetType.RETWEET)
        assert out.tweets[rt.ref_tid].text == "x"
        a = next(u for u in out.users.values() if u.followers)
        assert a.followers == {out.tweets[rt.tid].author_uid}

    def test_keyed_is_byte_stable(self, tmp_path):
        write_corpus(anonymize(self.base(), "keyed", "secret"), tmp_path / "a")
        write_corpus(anonymize(self.base(), "keyed", "secret"), tmp_path / "b")
        for f in ("tweets.jsonl", "users.jsonl"):
            assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()

    def test_random_mode_differs_between_runs(self):
        assert set(anonymize(self.base()).tweets) != set(anonymize(self.base()).tweets)

    def test_structure_is_preserved(self):
        c = self.base()
        assert structure_hash(anonymize(c)) == structure_hash(c)

    def test_keyed_needs_key(self):
        with pytest.raises(ValueError):
            anonymize(self.base(), "keyed", None)


tweet_kinds = st.sampled_from(["original", "retweet", "reply", "quote"])


@st.composite
def small_corpora(draw):
    n = draw(st.integers(0, 25))
    tweets = []
    for i in range(n):
        kind = draw(tweet_kinds)
        ref = None if kind == "original" else f"t{draw(st.integers(0, n + 2))}"
        tweets.append(tw(f"t{i}", kind, ts=T0 + draw(st.integers(0, 30 * DAY)),
                         author=f"u{draw(st.integers(0, 5))}", ref=ref,
                         text=draw(st.text(max_size=12))))
    return corpus_of(tweets)


class TestProperties:
    @settings(max_examples=40, deadline=None)
    @given(small_corpora())
    def test_ingest_roundtrip_is_identity(self, tmp_path_factory, c):
        d = tmp_path_factory.mktemp("rt")
        write_corpus(c, d)
        back = read_corpus(d)
        assert back.tweets == c.tweets
        assert {u: user_to_record(x) for u, x in back.users.items()} == \
               {u: user_to_record(x) for u, x in c.users.items()}

    @settings(max_examples=40, deadline=None)
    @given(small_corpora())
    def test_window_and_type_ref_consistency(self, c):
        for t in c.tweets.values():
            assert WINDOW[0] <= t.timestamp <= WINDOW[1]
            assert (t.type is TweetType.ORIGINAL) == (t.ref_tid is None)

    @settings(max_examples=30, deadline=None)
    @given(small_corpora())
    def test_anonymize_preserves_structure(self, c):
        c, _ = resolve_references(c)
        out = anonymize(c, "keyed", "k")
        assert structure_hash(out) == structure_hash(c)
        assert len(out.dangling) == len(c.dangling)


def test_tweet_invariants():
    with pytest.raises(ValueError):
        Tweet("1", TweetType.RETWEET, T0, "a")
    with pytest.raises(ValueError):
        tw("1", sentiment=1.5)
    with pytest.raises(ValueError):
        tw("1", party="GREEN")
    with pytest.raises(ValueError):
        User("u", bot_score=-0.1)
