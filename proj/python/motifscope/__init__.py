"""Ego-network motif features, method-group inference and account profiling."""

from ._motifscope import (
    ConfigError,
    InputError,
    Model,
    Signatures,
    StageError,
    __version__,
    cluster,
    cut_tree,
    default_archetypes,
    etn_dot,
    featurize_edges,
    featurize_store,
    ingest,
    linkage,
    mine_itemset,
    run_pipeline,
    silhouette,
    stats,
    synth,
)

__all__ = [
    "ConfigError",
    "InputError",
    "Model",
    "Signatures",
    "StageError",
    "__version__",
    "cluster",
    "cut_tree",
    "default_archetypes",
    "etn_dot",
    "featurize_edges",
    "featurize_store",
    "ingest",
    "linkage",
    "mine_itemset",
    "run_pipeline",
    "silhouette",
    "stats",
    "synth",
]
