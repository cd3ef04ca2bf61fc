"""Versioned model bundle: seeded specs plus fitted parameters."""
from __future__ import annotations

import pickle
from pathlib import Path
from typing import Sequence

from botspotter import __version__
from botspotter.ensemble.base import TrainedModel
from botspotter.errors import DataError

FORMAT = "botspotter-model-bundle"
VERSION = 1


def save_bundle(path: str | Path, models: Sequence[TrainedModel], meta: dict | None = None) -> None:
    payload = {
        "format": FORMAT,
        "version": VERSION,
        "tool_version": __version__,
        "specs": [m.spec.to_dict() for m in models],
        "models": list(models),
        "meta": meta or {},
    }
    with open(path, "wb") as fh:
        pickle.dump(payload, fh, protocol=4)


def load_bundle(path: str | Path) -> tuple[list[TrainedModel], dict]:
    """Only load bundles you produced yourself: the payload is a pickle."""
    try:
        with open(path, "rb") as fh:
            payload = pickle.load(fh)
    except (OSError, pickle.UnpicklingError, EOFError) as exc:
        raise DataError(f"cannot read model bundle {path}: {exc}") from exc
    if not isinstance(payload, dict) or payload.get("format") != FORMAT:
        raise DataError(f"{path} is not a model bundle")
    if payload.get("version") != VERSION:
        raise DataError(f"bundle version {payload.get('version')} unsupported (expected {VERSION})")
    return payload["models"], payload["meta"]
