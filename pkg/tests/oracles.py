"""Brute-force reference implementations used only by tests."""
from __future__ import annotations

import math
import random
from collections import deque
from datetime import datetime, timezone

from botspotter.domain import PARTIES, THEMES, TWEET_TYPES
from botspotter.lexicon import normalize_text

from conftest import DAY, T0, corpus_of, tw


def matching_text(c, t):
    """Own text, or the text of the first non-retweet reached by following retweet refs."""
    seen, cur = set(), t
    while cur.type.value == "retweet":
        if cur.tid in seen or cur.ref_tid not in c.tweets:
            return t.text
        seen.add(cur.tid)
        cur = c.tweets[cur.ref_tid]
    return cur.text


def party_of(c, t, cfg):
    text = normalize_text(matching_text(c, t), cfg.lexicon.emoji_map)
    hits = [b.name for b in cfg.party_bags if any(k in text for k in b.keywords)]
    return hits[0] if len(hits) == 1 else None


def themes_of(c, t, cfg):
    text = normalize_text(matching_text(c, t), cfg.lexicon.emoji_map)
    return {b.name for b in cfg.theme_bags if any(k in text for k in b.keywords)}


def profile_oracle(c, uid, cfg, labels=None):
    """120 cells by filtering the whole corpus once per cell.

    `labels` maps tid -> (party, themes); it is computed here when not supplied.
    """
    if labels is None:
        labels = tweet_labels(c, cfg)
    out = []
    for pi in TWEET_TYPES:
        for p in PARTIES:
            xs = [t.sentiment for t in c.tweets.values()
                  if t.author_uid == uid and t.type.value == pi and labels[t.tid][0] == p]
            out.append(sum(xs) / len(xs) if xs else 0.5)
    for pi in TWEET_TYPES:
        for p in PARTIES:
            for g in THEMES:
                xs = [t.sentiment for t in c.tweets.values()
                      if t.author_uid == uid and t.type.value == pi and labels[t.tid][0] == p
                      and g in labels[t.tid][1]]
                out.append(sum(xs) / len(xs) if xs else 0.5)
    return out


def tweet_labels(c, cfg):
    return {t.tid: (party_of(c, t, cfg), themes_of(c, t, cfg)) for t in c.tweets.values()}


def random_mini_corpus(rng: random.Random, cfg, max_tweets=200, n_users=6):
    """Raw corpus whose texts mix party and theme keywords, so exclusivity fires and fails."""
    party_kw = [sorted(b.keywords) for b in cfg.party_bags]
    theme_kw = [sorted(b.keywords) for b in cfg.theme_bags]
    words = ["bueno", "malo", "vergüenza", "gracias", "hoy", "nada", "odio", "genial"]
    n = rng.randint(0, max_tweets)
    tweets = []
    for i in range(n):
        kind = rng.choice(TWEET_TYPES) if i else "original"
        parts = [rng.choice(words) for _ in range(rng.randint(0, 3))]
        for _ in range(rng.choice([0, 1, 1, 1, 2])):
            parts.append(rng.choice(rng.choice(party_kw)))
        for _ in range(rng.choice([0, 1, 2])):
            parts.append(rng.choice(rng.choice(theme_kw)))
        rng.shuffle(parts)
        ref = None
        if kind != "original":
            ref = f"t{rng.randrange(i)}" if rng.random() < 0.9 else "missing"
        tweets.append(tw(f"t{i}", kind, ts=T0 + rng.randrange(30 * DAY),
                         author=f"u{rng.randrange(n_users)}", text=" ".join(parts), ref=ref))
    return corpus_of(tweets)


def bfs_closeness(n, edges):
    """(n_c - 1) / sum of BFS distances within the component; 0 for isolated nodes."""
    adj = [set() for _ in range(n)]
    for a, b in edges:
        if a != b:
            adj[a].add(b)
            adj[b].add(a)
    out = []
    for s in range(n):
        dist = {s: 0}
        q = deque([s])
        while q:
            v = q.popleft()
            for w in adj[v]:
                if w not in dist:
                    dist[w] = dist[v] + 1
                    q.append(w)
        total = sum(dist.values())
        out.append((len(dist) - 1) / total if total else 0.0)
    return out


def union_find_components(nodes, edges):
    parent = {v: v for v in nodes}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in edges:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
    groups = {}
    for v in nodes:
        groups.setdefault(find(v), set()).add(v)
    return list(groups.values())


def close(a, b, tol=1e-12):
    return math.isclose(a, b, rel_tol=0, abs_tol=tol)


def _utc_day(ts):
    return datetime.fromtimestamp(ts, tz=timezone.utc).date().isoformat()


def reconcile_reports(c, decisions):
    """Recount every report cell by scanning the corpus; returns a list of mismatches."""
    from botspotter import reports as R

    bad = []
    tweets = list(c.tweets.values())
    cls = {uid: (u.user_class.value if u.user_class else "uncertain") for uid, u in c.users.items()}

    def check(name, got, want):
        if got != want:
            bad.append(f"{name}: got {got!r}, want {want!r}")

    # tweet types
    t = R.tweet_type_table(c)
    for row in t.to_dicts():
        of_type = [x for x in tweets if x.type.value == row["type"]]
        check(f"types/{row['type']}/count", row["count"], len(of_type))
        check(f"types/{row['type']}/avg", row["per_user_avg"],
              len(of_type) / len({x.author_uid for x in of_type}) if of_type else 0.0)
    check("types/total", sum(t.column("count")), len(tweets))
    if tweets and not math.isclose(sum(t.column("proportion")), 1.0, abs_tol=1e-9):
        bad.append("types/proportion sum")

    # user groups
    g = R.user_group_table(c)
    for row in g.to_dicts():
        members = [u for u in c.users if cls[u] == row["class"]]
        check(f"groups/{row['class']}/users", row["users"], len(members))
        n_tw = sum(1 for x in tweets if cls.get(x.author_uid) == row["class"])
        check(f"groups/{row['class']}/avg", row["avg_tweets"], n_tw / len(members) if members else 0.0)
    check("groups/total", sum(g.column("users")), len(c.users))

    # class x type
    ct = R.class_type_table(c)
    for row in ct.to_dicts():
        for ty in TWEET_TYPES:
            check(f"class-types/{row['class']}/{ty}", row[ty],
                  sum(1 for x in tweets if cls.get(x.author_uid, "Unknown") == row["class"] and x.type.value == ty))
        check(f"class-types/{row['class']}/total", row["total"], sum(row[ty] for ty in TWEET_TYPES))
    check("class-types/grand", sum(ct.column("total")), len(tweets))

    # daily series
    keyers = {
        "type": lambda x: x.type.value,
        "class": lambda x: cls.get(x.author_uid, "Unknown"),
        "party": lambda x: x.party_label or "none",
    }
    for group_by, key in keyers.items():
        d = R.daily_volumes(c, group_by)
        check(f"daily/{group_by}/sum", sum(d.column("count")), len(tweets))
        for day, k, n in d.rows:
            check(f"daily/{group_by}/{day}/{k}", n,
                  sum(1 for x in tweets if _utc_day(x.timestamp) == day and key(x) == k))

    # appearance
    ap = R.bot_appearance(c, decisions)
    first = {}
    for uid in decisions:
        ts = [x.timestamp for x in tweets if x.author_uid == uid]
        if ts:
            first[uid] = min(ts)
    for day, k, new, cum in ap.rows:
        check(f"appearance/{day}/{k}/new", new,
              sum(1 for u, ts in first.items() if _utc_day(ts) == day and decisions[u].label == k))
        check(f"appearance/{day}/{k}/cumulative", cum,
              sum(1 for u, ts in first.items() if _utc_day(ts) <= day and decisions[u].label == k))
    check("appearance/total", sum(ap.column("new")), len(first))

    # interactions
    m = R.interaction_matrix(c)
    kept = 0
    for a, p, ty, n in m.to_table().rows:
        want = sum(1 for x in tweets if x.type.value == ty and x.ref_tid in c.tweets
                   and cls.get(x.author_uid) == a and cls.get(c.tweets[x.ref_tid].author_uid) == p)
        kept += want
        check(f"matrix/{a}/{p}/{ty}", n, want)
    check("matrix/excluded", m.excluded, sum(1 for x in tweets if x.ref_tid is not None) - kept)

    # sentiment
    groups = R.comparison_groups(c, decisions)
    for row in R.sentiment_distributions(c, groups).to_dicts():
        xs = sorted(x.sentiment for x in tweets
                    if groups.get(x.author_uid) == row["group"] and x.party_label == row["target"])
        check(f"sentiment/{row['group']}/{row['target']}/n", row["n"], len(xs))
        for q, name in ((0, "min"), (0.25, "q1"), (0.5, "median"), (0.75, "q3"), (1, "max")):
            pos = q * (len(xs) - 1)
            lo, hi = math.floor(pos), math.ceil(pos)
            want = xs[lo] + (xs[hi] - xs[lo]) * (pos - lo)
            if not math.isclose(row[name], want, abs_tol=1e-12):
                bad.append(f"sentiment/{row['group']}/{row['target']}/{name}")

    # retweet activity
    single = {u: d.parties[0] for u, d in decisions.items() if d.kind == "single"}
    act = R.bot_retweet_activity(c, decisions)
    for day, party, series, n in act.rows:
        rts = [x for x in tweets if x.type.value == "retweet" and _utc_day(x.timestamp) == day]
        if series == "total":
            want = sum(1 for x in rts if single.get(x.author_uid) == party)
        else:
            want = sum(1 for x in rts if x.ref_tid in c.tweets
                       and single.get(c.tweets[x.ref_tid].author_uid) == party)
        check(f"activity/{day}/{party}/{series}", n, want)
    check("activity/total", sum(n for *_, s, n in act.rows if s == "total"),
          sum(1 for x in tweets if x.type.value == "retweet" and x.author_uid in single))
    return bad


def percentile_sorted(xs, q):
    """Sort, then interpolate linearly at rank q * (n - 1)."""
    s = sorted(float(x) for x in xs)
    pos = q * (len(s) - 1)
    lo, hi = math.floor(pos), math.ceil(pos)
    return s[lo] + (s[hi] - s[lo]) * (pos - lo)
