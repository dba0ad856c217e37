"""Progressive permutation of group labels for robust feature discovery."""

__version__ = "0.1.0"

from .data import (
    AnalysisConfig,
    FeatureTable,
    Orientation,
    OutcomeKind,
    OutcomeVector,
    TestKind,
    align,
    load_feature_table,
    load_outcome,
)
from .runner import analyze, plan, run
from .summarize import AnalysisReport

__all__ = [
    "AnalysisConfig",
    "AnalysisReport",
    "FeatureTable",
    "Orientation",
    "OutcomeKind",
    "OutcomeVector",
    "TestKind",
    "align",
    "analyze",
    "load_feature_table",
    "load_outcome",
    "plan",
    "run",
]
