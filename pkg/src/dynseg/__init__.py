"""Segment community detection for snapshot-sequence dynamic networks."""

from .consensus import ConsensusSpec
from .dyngraph import (
    ChangePointSet,
    DynamicNetwork,
    Partition,
    ScdOutput,
    Segmentation,
    Snapshot,
    load_dynamic_network,
    load_output,
)
from .generator import GeneratorConfig, generate
from .objectives import Criterion, FitMeasure, ObjectiveSpec
from .search import SearchSpec, build_table, solve_cscd, solve_scd
from .static_cluster import ClustererSpec, WeightedGraph

__all__ = [
    "ChangePointSet",
    "ClustererSpec",
    "ConsensusSpec",
    "Criterion",
    "DynamicNetwork",
    "FitMeasure",
    "GeneratorConfig",
    "ObjectiveSpec",
    "Partition",
    "ScdOutput",
    "SearchSpec",
    "Segmentation",
    "Snapshot",
    "WeightedGraph",
    "build_table",
    "generate",
    "load_dynamic_network",
    "load_output",
    "solve_cscd",
    "solve_scd",
]
