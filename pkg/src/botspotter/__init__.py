"""Political social-bot spotting: gating, affinity profiling, friendship graphs and reports."""

__version__ = "0.1.0"
