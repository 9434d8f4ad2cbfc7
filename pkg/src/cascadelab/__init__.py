"""Propagation-graph features and misinformation-classification experiments for social cascades."""

from .builder import build_final_graph, build_snapshot, snapshot_series
from .evolution import early_features, final_features, series_stats
from .model import (CascadeDataset, FeatureVector, FriendshipStore, InteractionRecord,
                    PostRecord, PropagationGraph, load_dataset, validate_dataset)

__version__ = "0.1.0"

__all__ = [
    "CascadeDataset", "FeatureVector", "FriendshipStore", "InteractionRecord", "PostRecord",
    "PropagationGraph", "build_final_graph", "build_snapshot", "snapshot_series",
    "early_features", "final_features", "series_stats", "load_dataset", "validate_dataset",
]
