"""Stage runner over a workspace directory with a hash-checked manifest.

Each stage writes into `<workspace>/<stage>/`. A stage's hash covers its own settings,
the digests of its upstream stages' output files, and the digests of any external input
files, so a stage reruns exactly when something it depends on changed.
"""
from __future__ import annotations

import hashlib
import json
import logging
import shutil
from dataclasses import asdict, replace
from pathlib import Path
from typing import Callable

from botspotter import __version__
from botspotter.config import Config
from botspotter.corpus import (
    anonymize, ingest_tweets, parse_window, read_corpus,
    remove_unusable_users, resolve_references, write_corpus,
)
from botspotter.domain import PARTIES
from botspotter.ensemble.base import ClassifierSpec, class_counts, train
from botspotter.ensemble.bundle import load_bundle, save_bundle
from botspotter.ensemble.fusion import (
    classify_bots, read_decisions, threshold, write_affinity_matrix, write_decisions,
)
from botspotter.ensemble.validation import cross_validate
from botspotter.errors import ConfigError, DataError, StaleUpstreamError
from botspotter.gate import FileScoreProvider, fetch_scores, gate
from botspotter.graph import (
    annotate_centrality, build_graph, cluster_affinity_agreement, giant_component,
    write_gexf, write_graph_csvs,
)
from botspotter.layout import LayoutParams, apply_layout
from botspotter.lexicon import augment, load_match_config
from botspotter.profiler import (
    build_feature_matrix, eligible_bots, read_feature_csv, read_labels, select_users,
    write_feature_csv, write_labels,
)
from botspotter.reports import build_report, daily_volumes
from botspotter.synth import load_scenario, write_synthetic

log = logging.getLogger("botspotter.pipeline")

MANIFEST = "manifest.json"
STAGES = ("synth", "ingest", "augment", "gate", "profile", "train", "affinity", "graph", "reports")
UPSTREAM: dict[str, tuple[str, ...]] = {
    "synth": (),
    "ingest": ("synth",),
    "augment": ("ingest",),
    "gate": ("augment",),
    "profile": ("gate",),
    "train": ("profile",),
    "affinity": ("profile", "train"),
    "graph": ("gate", "affinity"),
    "reports": ("gate", "affinity"),
}


def file_digest(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def dir_digests(d: Path) -> dict[str, str]:
    if not d.is_dir():
        return {}
    return {p.relative_to(d).as_posix(): file_digest(p) for p in sorted(d.rglob("*")) if p.is_file()}


def _json_hash(obj) -> str:
    return hashlib.sha256(json.dumps(obj, sort_keys=True, default=str).encode()).hexdigest()


class Workspace:
    def __init__(self, root: str | Path, cfg: Config):
        self.root = Path(root)
        self.cfg = cfg
        self.manifest_path = self.root / MANIFEST
        self.manifest = self._load_manifest()

    def _load_manifest(self) -> dict:
        if self.manifest_path.exists():
            try:
                m = json.loads(self.manifest_path.read_text())
            except json.JSONDecodeError as exc:
                raise DataError(f"corrupt manifest {self.manifest_path}: {exc}") from exc
            if isinstance(m, dict) and isinstance(m.get("stages"), dict):
                return m
        return {"stages": {}}

    def save_manifest(self) -> None:
        self.manifest["tool_version"] = __version__
        self.manifest["seed"] = self.cfg.seed
        self.manifest["config_hash"] = _json_hash(self.cfg.to_dict())
        self.manifest_path.write_text(json.dumps(self.manifest, indent=1, sort_keys=True) + "\n")

    def dir(self, stage: str) -> Path:
        return self.root / stage

    # --- which stages apply ---------------------------------------------------------
    def active(self, stage: str) -> bool:
        if stage == "synth":
            return self.cfg.synthetic is not None
        if stage == "train":
            return self.cfg.inputs.bundle is None
        return True

    def upstream(self, stage: str) -> tuple[str, ...]:
        return tuple(u for u in UPSTREAM[stage] if self.active(u))

    def ancestors(self, stage: str) -> list[str]:
        seen: list[str] = []
        stack = list(self.upstream(stage))
        while stack:
            s = stack.pop()
            if s not in seen:
                seen.append(s)
                stack.extend(self.upstream(s))
        return [s for s in STAGES if s in seen]

    # --- hashing ----------------------------------------------------------------------
    def stage_hash(self, stage: str) -> str:
        payload = {
            "stage": stage,
            "version": __version__,
            "params": STAGE_PARAMS[stage](self.cfg),
            "upstream": {u: dir_digests(self.dir(u)) for u in self.upstream(stage)},
            "inputs": {name: file_digest(Path(p)) for name, p in STAGE_INPUTS[stage](self.cfg).items()},
        }
        return _json_hash(payload)

    def is_current(self, stage: str, h: str | None = None) -> bool:
        rec = self.manifest["stages"].get(stage)
        if not rec or not rec.get("completed"):
            return False
        if rec.get("hash") != (h or self.stage_hash(stage)):
            return False
        return rec.get("outputs") == dir_digests(self.dir(stage))


def _missing(path: str | None, what: str) -> None:
    if path is not None and not Path(path).exists():
        raise DataError(f"{what} file {path} does not exist; fix the config path or the "
                        f"BOTSPOTTER_{what.upper()} environment variable")


def _source_files(cfg: Config) -> dict[str, str]:
    i = cfg.inputs
    out = {}
    if cfg.synthetic is None:
        if i.tweets is None:
            raise ConfigError("config needs inputs.tweets (or a synthetic section)")
        out["tweets"] = i.tweets
        if i.users is not None:
            out["users"] = i.users
    for name in ("scores", "removed", "labels"):
        if getattr(i, name) is not None:
            out[name] = getattr(i, name)
    for name, p in out.items():
        _missing(p, name)
    return out


def _optional(cfg: Config, *names: str) -> dict[str, str]:
    out = {n: getattr(cfg.inputs, n) for n in names if getattr(cfg.inputs, n) is not None}
    for n, p in out.items():
        _missing(p, n)
    return out


def _synthetic_scenario(cfg: Config):
    syn = dict(cfg.synthetic or {})
    path = syn.pop("scenario", None)
    syn.pop("seed", None)
    return load_scenario(path, **syn)


STAGE_PARAMS: dict[str, Callable[[Config], dict]] = {
    "synth": lambda cfg: {"scenario": _synthetic_scenario(cfg).to_dict() if cfg.synthetic else None,
                          "seed": (cfg.synthetic or {}).get("seed", cfg.seed)},
    "ingest": lambda cfg: asdict(cfg.ingest),
    "augment": lambda cfg: {},
    "gate": lambda cfg: asdict(cfg.gate),
    "profile": lambda cfg: {},
    "train": lambda cfg: {"ensemble": asdict(cfg.ensemble), "seed": cfg.seed},
    "affinity": lambda cfg: {"delta": cfg.ensemble.delta},
    "graph": lambda cfg: {"graph": asdict(cfg.graph), "seed": cfg.seed},
    "reports": lambda cfg: asdict(cfg.reports),
}
STAGE_INPUTS: dict[str, Callable[[Config], dict]] = {
    "synth": lambda cfg: {},
    "ingest": _source_files,
    "augment": lambda cfg: _optional(cfg, "bags", "lexicon"),
    "gate": lambda cfg: {},
    "profile": lambda cfg: {},
    "train": lambda cfg: {},
    "affinity": lambda cfg: _optional(cfg, "bundle"),
    "graph": lambda cfg: {},
    "reports": lambda cfg: {},
}


# --- stage bodies ------------------------------------------------------------------------

def _run_synth(ws: Workspace, out: Path) -> dict:
    scenario = _synthetic_scenario(ws.cfg)
    seed = (ws.cfg.synthetic or {}).get("seed", ws.cfg.seed)
    c, truth = write_synthetic(out, scenario, seed)
    return {"tweets": len(c.tweets), "users": len(c.users), "bots": len(truth.bots())}


def _run_ingest(ws: Workspace, out: Path) -> dict:
    cfg = ws.cfg
    if cfg.synthetic is not None:
        src = ws.dir("synth")
        tweets_path, users_path = src / "tweets.jsonl", src / "users.jsonl"
    else:
        tweets_path, users_path = Path(cfg.inputs.tweets), cfg.inputs.users
    c, rep = ingest_tweets(tweets_path, parse_window(*cfg.ingest.window), users_path)
    counts = {"lines": rep.lines, "accepted": rep.accepted, "malformed": rep.malformed,
              "out_of_window": rep.out_of_window, "duplicate": rep.duplicate}
    if cfg.inputs.labels:
        labels = read_labels(cfg.inputs.labels)
        c = c.with_users(replace(u, manual_party=labels.get(u.uid, u.manual_party)) for u in c.users.values())
    if cfg.inputs.scores:
        c, fetched = fetch_scores(c, FileScoreProvider(cfg.inputs.scores))
        counts["scores_unavailable"] = fetched.unavailable
    removed = []
    if cfg.inputs.removed:
        removed = [ln.strip() for ln in Path(cfg.inputs.removed).read_text().splitlines() if ln.strip()]
    c, rem = remove_unusable_users(c, removed)
    c, refs = resolve_references(c)
    counts.update(removed_no_tweets=rem.no_tweets, removed_listed=rem.listed,
                  resolved_refs=refs.resolved, dangling_refs=len(refs.dangling))
    if cfg.ingest.anonymize != "none":
        c = anonymize(c, cfg.ingest.anonymize, cfg.ingest.key)
    write_corpus(c, out)
    return counts


def _run_augment(ws: Workspace, out: Path) -> dict:
    c = read_corpus(ws.dir("ingest"))
    mc = load_match_config(ws.cfg.inputs.bags, ws.cfg.inputs.lexicon)
    c = augment(c, mc)
    write_corpus(c, out)
    labeled = sum(1 for t in c.tweets.values() if t.party_label is not None)
    return {"tweets": len(c.tweets), "party_labeled": labeled}


def _run_gate(ws: Workspace, out: Path) -> dict:
    c = read_corpus(ws.dir("augment"))
    c, result, fetched = gate(c, pin=ws.cfg.gate.pin)
    write_corpus(c, out)
    summary = {"p75": result.thresholds.p75, "p95": result.thresholds.p95, "counts": result.counts,
               "unscored": fetched.unavailable}
    (out / "gate.json").write_text(json.dumps(summary, indent=1, sort_keys=True) + "\n")
    return result.counts


def _run_profile(ws: Workspace, out: Path) -> dict:
    c = read_corpus(ws.dir("gate"))
    elig = eligible_bots(c)
    bots = select_users(c, "bots")
    X, S = build_feature_matrix(c, bots)
    write_feature_csv(out / "bots.csv", bots, X, S)
    labeled = select_users(c, "labeled")
    XL, SL = build_feature_matrix(c, labeled)
    write_feature_csv(out / "labeled.csv", labeled, XL, SL)
    write_labels(out / "labels.csv", {u: c.users[u].manual_party for u in labeled})
    summary = {"eligible_bots": len(elig.eligible_bots), "total_bots": elig.total_bots,
               "ratio": elig.ratio, "labeled": len(labeled),
               "labeled_per_party": class_counts([c.users[u].manual_party for u in labeled])}
    (out / "eligibility.json").write_text(json.dumps(summary, indent=1, sort_keys=True) + "\n")
    return {k: summary[k] for k in ("eligible_bots", "total_bots", "labeled")}


def _specs(cfg: Config) -> list[ClassifierSpec]:
    return [ClassifierSpec(k, dict(cfg.ensemble.params.get(k, {})), seed=cfg.seed + i)
            for i, k in enumerate(cfg.ensemble.kinds)]


def _training_set(ws: Workspace):
    uids, X, _ = read_feature_csv(ws.dir("profile") / "labeled.csv")
    labels = read_labels(ws.dir("profile") / "labels.csv")
    if not uids:
        raise DataError("no manually labeled users in the corpus: add manual_party to the user "
                        "file, pass inputs.labels, or point inputs.bundle at a trained bundle")
    return X, [labels[u] for u in uids]


def _run_train(ws: Workspace, out: Path) -> dict:
    X, y = _training_set(ws)
    specs = _specs(ws.cfg)
    models = [train(s, X, y) for s in specs]
    save_bundle(out / "bundle.pkl", models, {"labels": class_counts(y), "seed": ws.cfg.seed})
    counts = {"models": len(models), "training_rows": len(y)}
    if ws.cfg.ensemble.cv_folds:
        report = cross_validate(specs, X, y, ws.cfg.ensemble.cv_folds, ws.cfg.seed)
        report.write_csv(out / "cv.csv")
        counts["cv_accuracy"] = {k: round(m["accuracy"], 4) for k, m in report.metrics.items()}
    return counts


def _run_affinity(ws: Workspace, out: Path) -> dict:
    bundle = Path(ws.cfg.inputs.bundle) if ws.cfg.inputs.bundle else ws.dir("train") / "bundle.pkl"
    models, _ = load_bundle(bundle)
    uids, X, _ = read_feature_csv(ws.dir("profile") / "bots.csv")
    delta = ws.cfg.ensemble.delta if ws.cfg.ensemble.delta is not None else threshold(len(PARTIES))
    decisions, matrix = classify_bots(models, uids, X, delta)
    write_decisions(out / "decisions.csv", decisions)
    write_affinity_matrix(out / "affinity_matrix.csv", matrix)
    kinds = [d.kind for d in decisions.values()]
    return {k: kinds.count(k) for k in ("single", "pair", "rejected")}


def _run_graph(ws: Workspace, out: Path) -> dict:
    c = read_corpus(ws.dir("gate"))
    decisions = read_decisions(ws.dir("affinity") / "decisions.csv")
    g_cfg = ws.cfg.graph
    if g_cfg.nodes == "single":
        chosen = {u: d for u, d in decisions.items() if d.kind == "single"}
    elif g_cfg.nodes == "accepted":
        chosen = {u: d for u, d in decisions.items() if d.accepted}
    else:
        chosen = decisions
    g = build_graph({u: c.users[u] for u in chosen if u in c.users}, {u: d.label for u, d in chosen.items()})
    n_all = len(g.nodes)
    if g_cfg.giant_only:
        g = giant_component(g)
    annotate_centrality(g)
    if g.nodes:
        apply_layout(g, LayoutParams(iterations=g_cfg.iterations, scaling=g_cfg.scaling,
                                     gravity=g_cfg.gravity, seed=ws.cfg.seed))
    write_gexf(g, out / "graph.gexf")
    write_graph_csvs(g, out / "nodes.csv", out / "edges.csv")
    counts = {"candidate_nodes": n_all, "nodes": len(g.nodes), "edges": len(g.edges)}
    if g.edges and g_cfg.agreement_samples:
        single = {u: (d.parties[0] if d.kind == "single" else None) for u, d in decisions.items()}
        agree = cluster_affinity_agreement(g, single, g_cfg.agreement_samples, ws.cfg.seed)
        (out / "agreement.json").write_text(json.dumps(asdict(agree), indent=1, sort_keys=True) + "\n")
        counts["agreement"] = round(agree.observed, 4)
        counts["agreement_baseline"] = round(agree.baseline_mean, 4)
    return counts


def _run_reports(ws: Workspace, out: Path) -> dict:
    c = read_corpus(ws.dir("gate"))
    decisions = read_decisions(ws.dir("affinity") / "decisions.csv")
    written = 0
    for kind in ws.cfg.reports.kinds:
        if kind == "daily":
            for g in ws.cfg.reports.daily_group_by:
                daily_volumes(c, g).write_csv(out / f"daily_{g}.csv")
                written += 1
            continue
        build_report(kind, c, decisions).write_csv(out / f"{kind}.csv")
        written += 1
    return {"reports": written}


RUNNERS: dict[str, Callable[[Workspace, Path], dict]] = {
    "synth": _run_synth, "ingest": _run_ingest, "augment": _run_augment, "gate": _run_gate,
    "profile": _run_profile, "train": _run_train, "affinity": _run_affinity,
    "graph": _run_graph, "reports": _run_reports,
}


def _execute(ws: Workspace, stage: str, h: str) -> dict:
    out = ws.dir(stage)
    if out.exists():
        shutil.rmtree(out)
    out.mkdir(parents=True)
    log.info("stage %s: running", stage)
    counts = RUNNERS[stage](ws, out)
    ws.manifest["stages"][stage] = {
        "completed": True,
        "hash": h,
        "outputs": dir_digests(out),
        "counts": counts,
        "upstream": list(ws.upstream(stage)),
    }
    ws.save_manifest()
    log.info("stage %s: done %s", stage, json.dumps(counts, sort_keys=True, default=str))
    return counts


def run_pipeline(workspace: str | Path, cfg: Config, only: str | None = None, force: bool = False) -> dict:
    """Run every applicable stage in order, skipping those whose hash and outputs are current.

    With `only`, run that single stage after checking that all of its upstream stages are
    current; a stale upstream raises StaleUpstreamError instead of silently mixing inputs.
    Returns the manifest plus a `ran` list naming the stages executed in this call.
    """
    ws = Workspace(workspace, cfg)
    ws.root.mkdir(parents=True, exist_ok=True)
    ran: list[str] = []
    if only is not None:
        if only not in STAGES:
            raise ConfigError(f"unknown stage {only!r}; choose from {STAGES}")
        if not ws.active(only):
            raise ConfigError(f"stage {only!r} does not apply to this config")
        for up in ws.ancestors(only):
            if not ws.is_current(up):
                raise StaleUpstreamError(
                    f"cannot run {only!r}: upstream stage {up!r} is missing or stale (its inputs, "
                    f"settings or outputs changed since it last ran); run the full pipeline or "
                    f"`--only {up}` first")
        h = ws.stage_hash(only)
        if force or not ws.is_current(only, h):
            _execute(ws, only, h)
            ran.append(only)
    else:
        for stage in STAGES:
            if not ws.active(stage):
                continue
            h = ws.stage_hash(stage)
            if not force and ws.is_current(stage, h):
                log.info("stage %s: up to date, skipped", stage)
                continue
            _execute(ws, stage, h)
            ran.append(stage)
    ws.save_manifest()
    return {**ws.manifest, "ran": ran}
