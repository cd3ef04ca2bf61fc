"""Run the full pipeline on the generated corpus and print per-stage counts."""
import argparse
import json
import time
from pathlib import Path

from botspotter.config import load_config
from botspotter.pipeline import run_pipeline

ROOT = Path(__file__).resolve().parents[1]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--workspace", default="workspace")
    ap.add_argument("--config", default=str(ROOT / "configs" / "synthetic.yaml"))
    ap.add_argument("--force", action="store_true")
    a = ap.parse_args()
    t0 = time.perf_counter()
    manifest = run_pipeline(a.workspace, load_config(a.config), force=a.force)
    print(json.dumps({s: r["counts"] for s, r in manifest["stages"].items()}, indent=1, default=str))
    print(f"ran {manifest['ran']} in {time.perf_counter() - t0:.1f}s")


if __name__ == "__main__":
    main()
