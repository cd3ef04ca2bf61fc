"""Affinity recovery on synthetic corpora with planted party-aligned bot groups.

Sweeps the sentiment bias and reports how many accepted bots get the planted party as a
single-party label, and how many are rejected.
"""
import argparse

from botspotter.corpus import remove_unusable_users, resolve_references
from botspotter.ensemble import classify_bots, default_specs, train
from botspotter.gate import gate
from botspotter.lexicon import augment, load_match_config
from botspotter.profiler import build_feature_matrix, select_users
from botspotter.synth import generate_synthetic_corpus, load_scenario


def recover(scenario, seed, match):
    raw, truth = generate_synthetic_corpus(scenario, seed)
    c, _ = resolve_references(raw)
    c, _ = remove_unusable_users(c)
    c, _, _ = gate(augment(c, match))
    labeled = select_users(c, "labeled")
    X, _ = build_feature_matrix(c, labeled)
    models = [train(s, X, [c.users[u].manual_party for u in labeled]) for s in default_specs(seed)]
    bots = select_users(c, "bots")
    Xb, _ = build_feature_matrix(c, bots)
    decisions, matrix = classify_bots(models, bots, Xb)
    kinds = [d.kind for d in decisions.values()]
    correct = sum(1 for u, d in decisions.items() if d.kind == "single" and d.parties[0] == truth.party[u])
    accepted = len(kinds) - kinds.count("rejected")
    return {"bots": len(bots), "single": kinds.count("single"), "pair": kinds.count("pair"),
            "rejected": kinds.count("rejected"), "correct_single": correct,
            "share_of_accepted": correct / accepted if accepted else float("nan")}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--scenario", help="scenario YAML (defaults to the built-in scenario)")
    ap.add_argument("--biases", type=float, nargs="+", default=[0.05, 0.1, 0.2, 0.3])
    ap.add_argument("--seeds", type=int, nargs="+", default=[0])
    a = ap.parse_args()
    match = load_match_config()
    print("bias,seed,bots,single,pair,rejected,correct_single,share_of_accepted")
    for bias in a.biases:
        scenario = load_scenario(a.scenario, bias=bias)
        for seed in a.seeds:
            r = recover(scenario, seed, match)
            print(f"{bias},{seed},{r['bots']},{r['single']},{r['pair']},{r['rejected']},"
                  f"{r['correct_single']},{r['share_of_accepted']:.4f}", flush=True)


if __name__ == "__main__":
    main()
