"""`botspotter` command line: one subcommand per stage plus `run` for the whole pipeline.

Exit codes: 0 success, 2 configuration or usage error, 3 data error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from botspotter import __version__
from botspotter.errors import BotspotterError, ConfigError

log = logging.getLogger("botspotter")


def _pair(text: str) -> tuple[float, float]:
    try:
        a, b = (float(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("expected two comma-separated numbers, e.g. 0.236,0.691") from None
    return a, b


def _emit(obj) -> None:
    print(json.dumps(obj, indent=1, sort_keys=True, default=str))


# --- stage commands ---------------------------------------------------------------------

def cmd_ingest(a) -> int:
    from botspotter.corpus import (anonymize, ingest_tweets, parse_window, remove_unusable_users,
                                   resolve_references, write_corpus)
    from botspotter.gate import FileScoreProvider, fetch_scores

    c, rep = ingest_tweets(a.tweets, parse_window(a.window_start, a.window_end), a.users)
    if a.scores:
        c, _ = fetch_scores(c, FileScoreProvider(a.scores))
    removed = Path(a.removed).read_text().split() if a.removed else []
    c, rem = remove_unusable_users(c, removed)
    c, refs = resolve_references(c)
    if a.anonymize != "none":
        c = anonymize(c, a.anonymize, a.key)
    write_corpus(c, a.out)
    _emit({"accepted": rep.accepted, "malformed": rep.malformed, "out_of_window": rep.out_of_window,
           "duplicate": rep.duplicate, "users": len(c.users), "removed_no_tweets": rem.no_tweets,
           "removed_listed": rem.listed, "dangling_refs": len(refs.dangling)})
    return 0


def cmd_augment(a) -> int:
    from botspotter.corpus import read_corpus, write_corpus
    from botspotter.lexicon import augment, load_match_config

    c = augment(read_corpus(a.corpus), load_match_config(a.bags, a.lexicon))
    write_corpus(c, a.out)
    _emit({"tweets": len(c.tweets), "party_labeled": sum(t.party_label is not None for t in c.tweets.values())})
    return 0


def cmd_gate(a) -> int:
    from botspotter.corpus import read_corpus, write_corpus
    from botspotter.gate import FileScoreProvider, gate

    provider = FileScoreProvider(a.scores) if a.scores else None
    c, result, _ = gate(read_corpus(a.corpus), provider, a.pin_thresholds)
    write_corpus(c, a.out)
    summary = {"p75": result.thresholds.p75, "p95": result.thresholds.p95, "counts": result.counts}
    (Path(a.out) / "gate.json").write_text(json.dumps(summary, indent=1, sort_keys=True) + "\n")
    _emit(summary)
    return 0


def cmd_profile(a) -> int:
    from botspotter.corpus import read_corpus
    from botspotter.profiler import build_feature_matrix, select_users, write_feature_csv, write_labels

    c = read_corpus(a.corpus)
    uids = select_users(c, a.who)
    X, S = build_feature_matrix(c, uids)
    write_feature_csv(a.out, uids, X, S)
    if a.labels_out:
        write_labels(a.labels_out, {u: c.users[u].manual_party for u in uids
                                    if c.users[u].manual_party is not None})
    _emit({"users": len(uids)})
    return 0


def _training(a):
    from botspotter.profiler import read_feature_csv, read_labels
    from botspotter.errors import DataError

    uids, X, _ = read_feature_csv(a.features)
    labels = read_labels(a.labels)
    missing = [u for u in uids if u not in labels]
    if missing:
        raise DataError(f"{len(missing)} feature rows have no label (first: {missing[0]})")
    return X, [labels[u] for u in uids]


def cmd_train(a) -> int:
    from botspotter.ensemble.base import class_counts, default_specs, train
    from botspotter.ensemble.bundle import save_bundle

    X, y = _training(a)
    models = [train(s, X, y) for s in default_specs(a.seed)]
    save_bundle(a.out, models, {"labels": class_counts(y), "seed": a.seed})
    _emit({"models": len(models), "training_rows": len(y), "per_class": class_counts(y)})
    return 0


def cmd_cv(a) -> int:
    from botspotter.ensemble.base import default_specs
    from botspotter.ensemble.validation import cross_validate

    X, y = _training(a)
    report = cross_validate(default_specs(a.seed), X, y, a.folds, a.seed)
    if a.out:
        report.write_csv(a.out)
    _emit(report.metrics)
    return 0


def cmd_affinity(a) -> int:
    from botspotter.ensemble.bundle import load_bundle
    from botspotter.ensemble.fusion import classify_bots, threshold, write_affinity_matrix, write_decisions
    from botspotter.profiler import read_feature_csv

    models, _ = load_bundle(a.bundle)
    uids, X, _ = read_feature_csv(a.features)
    decisions, matrix = classify_bots(models, uids, X, a.delta if a.delta is not None else threshold())
    write_decisions(a.out, decisions)
    if a.matrix_out:
        write_affinity_matrix(a.matrix_out, matrix)
    kinds = [d.kind for d in decisions.values()]
    _emit({k: kinds.count(k) for k in ("single", "pair", "rejected")})
    return 0


def cmd_graph(a) -> int:
    from botspotter.corpus import read_corpus
    from botspotter.ensemble.fusion import read_decisions
    from botspotter.graph import annotate_centrality, build_graph, giant_component, write_gexf, write_graph_csvs
    from botspotter.layout import LayoutParams, apply_layout

    c = read_corpus(a.corpus)
    decisions = read_decisions(a.decisions)
    keep = {"single": lambda d: d.kind == "single", "accepted": lambda d: d.accepted,
            "all": lambda d: True}[a.nodes]
    chosen = {u: d for u, d in decisions.items() if keep(d) and u in c.users}
    g = build_graph({u: c.users[u] for u in chosen}, {u: d.label for u, d in chosen.items()})
    if not a.keep_all_components:
        g = giant_component(g)
    annotate_centrality(g)
    if g.nodes:
        apply_layout(g, LayoutParams(iterations=a.iterations, seed=a.seed))
    write_gexf(g, a.out)
    if a.csv_prefix:
        write_graph_csvs(g, f"{a.csv_prefix}nodes.csv", f"{a.csv_prefix}edges.csv")
    _emit({"nodes": len(g.nodes), "edges": len(g.edges)})
    return 0


def cmd_report(a) -> int:
    from botspotter.corpus import read_corpus
    from botspotter.ensemble.fusion import read_decisions
    from botspotter.reports import build_report

    c = read_corpus(a.corpus)
    decisions = read_decisions(a.decisions) if a.decisions else {}
    table = build_report(a.kind, c, decisions, a.group_by)
    table.write_csv(a.out)
    _emit({"rows": len(table.rows)})
    return 0


def cmd_synth(a) -> int:
    from botspotter.synth import load_scenario, write_synthetic

    c, truth = write_synthetic(a.out, load_scenario(a.scenario), a.seed)
    _emit({"tweets": len(c.tweets), "users": len(c.users), "bots": len(truth.bots())})
    return 0


def cmd_run(a) -> int:
    from dataclasses import replace

    from botspotter.config import load_config
    from botspotter.pipeline import run_pipeline

    cfg = load_config(a.config)
    if a.seed is not None:
        cfg = replace(cfg, seed=a.seed)
    manifest = run_pipeline(a.workspace, cfg, only=a.only, force=a.force)
    _emit({"ran": manifest["ran"],
           "stages": {k: v.get("counts") for k, v in manifest["stages"].items()}})
    return 0


# --- parser -------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    from botspotter.config import ANONYMIZE_MODES, GRAPH_NODE_SETS
    from botspotter.domain import DEFAULT_WINDOW
    from botspotter.pipeline import STAGES
    from botspotter.reports import REPORT_KINDS

    p = argparse.ArgumentParser(prog="botspotter", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"botspotter {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("ingest", help="load tweets and users into a corpus directory")
    s.add_argument("--tweets", required=True)
    s.add_argument("--users")
    s.add_argument("--scores", help="uid,score file attached before anonymization")
    s.add_argument("--removed", help="file of user ids to drop, one per line")
    s.add_argument("--window-start", default=DEFAULT_WINDOW[0])
    s.add_argument("--window-end", default=DEFAULT_WINDOW[1])
    s.add_argument("--anonymize", choices=ANONYMIZE_MODES, default="random")
    s.add_argument("--key", help="secret for keyed anonymization")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_ingest)

    s = sub.add_parser("augment", help="sentiment, theme hits and exclusive party labels")
    s.add_argument("--corpus", required=True)
    s.add_argument("--bags")
    s.add_argument("--lexicon")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_augment)

    s = sub.add_parser("gate", help="percentile human/uncertain/bot split")
    s.add_argument("--corpus", required=True)
    s.add_argument("--scores")
    s.add_argument("--pin-thresholds", type=_pair, metavar="P75,P95")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_gate)

    s = sub.add_parser("profile", help="120-cell sentiment feature matrix")
    s.add_argument("--corpus", required=True)
    s.add_argument("--who", choices=("bots", "labeled", "all"), default="bots")
    s.add_argument("--labels-out")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_profile)

    for name, func, help_ in (("train", cmd_train, "fit the six classifiers into a bundle"),
                              ("cv", cmd_cv, "stratified k-fold evaluation of the six classifiers")):
        s = sub.add_parser(name, help=help_)
        s.add_argument("--features", required=True)
        s.add_argument("--labels", required=True)
        s.add_argument("--seed", type=int, default=0)
        if name == "cv":
            s.add_argument("--folds", type=int, default=10)
            s.add_argument("--out")
        else:
            s.add_argument("--out", required=True)
        s.set_defaults(func=func)

    s = sub.add_parser("affinity", help="fused reject-option party decisions")
    s.add_argument("--bundle", required=True)
    s.add_argument("--features", required=True)
    s.add_argument("--delta", type=float)
    s.add_argument("--matrix-out")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_affinity)

    s = sub.add_parser("graph", help="friendship graph, closeness and layout as GEXF")
    s.add_argument("--corpus", required=True)
    s.add_argument("--decisions", required=True)
    s.add_argument("--nodes", choices=GRAPH_NODE_SETS, default="single")
    s.add_argument("--keep-all-components", action="store_true")
    s.add_argument("--iterations", type=int, default=100)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--csv-prefix", help="also write <prefix>nodes.csv and <prefix>edges.csv")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_graph)

    s = sub.add_parser("report", help="tables and daily series as CSV")
    s.add_argument("--corpus", required=True)
    s.add_argument("--decisions")
    s.add_argument("--kind", choices=REPORT_KINDS, required=True)
    s.add_argument("--group-by", choices=("type", "class", "party"), default="type")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_report)

    s = sub.add_parser("synth", help="seeded synthetic corpus with planted bot groups")
    s.add_argument("--scenario")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("run", help="run the whole pipeline in a workspace")
    s.add_argument("--workspace", required=True)
    s.add_argument("--config")
    s.add_argument("--seed", type=int)
    s.add_argument("--only", choices=STAGES)
    s.add_argument("--force", action="store_true", help="rerun stages even when current")
    s.set_defaults(func=cmd_run)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except BotspotterError as exc:
        print(f"botspotter: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except ValueError as exc:
        print(f"botspotter: error: {exc}", file=sys.stderr)
        return ConfigError.exit_code


if __name__ == "__main__":
    sys.exit(main())
