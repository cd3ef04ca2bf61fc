from botspotter.ensemble.base import (
    KINDS,
    ClassifierSpec,
    TrainedModel,
    default_specs,
    train,
)
from botspotter.ensemble.fusion import (
    AffinityDecision,
    affinity_matrix,
    classify_bots,
    decide_affinity,
    fuse,
    fuse_models,
    threshold,
)
from botspotter.ensemble.validation import CVReport, cross_validate

__all__ = [
    "KINDS", "ClassifierSpec", "TrainedModel", "default_specs", "train",
    "AffinityDecision", "affinity_matrix", "classify_bots", "decide_affinity", "fuse",
    "fuse_models", "threshold", "CVReport", "cross_validate",
]
