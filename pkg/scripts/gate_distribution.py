"""Class shares produced by the percentile gate on random score distributions."""
import argparse

import numpy as np

from botspotter.domain import UserClass
from botspotter.gate import class_of, compute_percentiles


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=10**5)
    ap.add_argument("--seed", type=int, default=0)
    a = ap.parse_args()
    rng = np.random.default_rng(a.seed)
    draws = {"uniform": rng.random(a.n), "beta(2,5)": rng.beta(2, 5, a.n),
             "ties": np.round(rng.random(a.n), 1)}
    print("distribution,p75,p95,human,uncertain,bot")
    for name, s in draws.items():
        th = compute_percentiles(s)
        cls = [class_of(x, th) for x in s]
        share = {k: cls.count(k) / a.n for k in (UserClass.HUMAN, UserClass.UNCERTAIN, UserClass.BOT)}
        print(f"{name},{th.p75:.4f},{th.p95:.4f}," + ",".join(f"{v:.4f}" for v in share.values()))


if __name__ == "__main__":
    main()
