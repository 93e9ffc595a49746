"""Spatial-navigation subscore indices from two-channel EOG recordings."""

__version__ = "0.1.0"

from .derive import DeriveConfig, IndexModel, cv_pair_score, derive_index, score
from .errors import NavdexError
from .features import FeatureConfig, extract_all, feature_table
from .indices import PublishedIndex, feature_importance, score_published
from .metrics import EvaluationReport, correlate_events, evaluate, spearman
from .model import (
    FEATURE_ABBRS,
    FEATURE_KEYS,
    Channel,
    EventCounts,
    FeatureVector,
    Recording,
    Subscale,
    SubscoreTable,
    load_recording,
    load_subscores,
)
from .preprocess import PreprocessConfig
from .synth import DriftConfig, GroundTruth, SynthConfig, generate, generate_cohort

__all__ = [
    "Channel", "DeriveConfig", "DriftConfig", "EvaluationReport", "EventCounts", "FEATURE_ABBRS",
    "FEATURE_KEYS", "FeatureConfig", "FeatureVector", "GroundTruth", "IndexModel", "NavdexError",
    "PreprocessConfig", "PublishedIndex", "Recording", "Subscale", "SubscoreTable", "SynthConfig",
    "correlate_events", "cv_pair_score", "derive_index", "evaluate", "extract_all", "feature_importance",
    "feature_table", "generate", "generate_cohort", "load_recording", "load_subscores",
    "score", "score_published", "spearman",
]
