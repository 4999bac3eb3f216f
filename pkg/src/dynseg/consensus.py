"""Consensus clustering: one partition per segment.

Three ways to reconcile the snapshots of a segment into a single partition:

* sum graph: cluster the weighted union graph whose edge weights count how
  many snapshots of the segment contain each edge;
* average-Louvain: Louvain where every move is scored by its mean
  modularity gain across the segment's snapshots;
* consensus matrix: cluster each snapshot, then cluster the co-occurrence
  graph whose weights are the fraction of shared snapshots in which two
  nodes land in one cluster.

The partition domain is always the union of the segment's node sets; a
per-segment seed derived from (base seed, start, end) makes results
independent of evaluation order.
"""

from __future__ import annotations

from dataclasses import dataclass

from ._seeds import derive_seed
from .dyngraph import DynamicNetwork, Partition
from .static_cluster import ClustererSpec, WeightedGraph, cluster, louvain_multi

CONSENSUS_METHODS = ("sum-graph", "average-louvain", "consensus-matrix")


@dataclass(frozen=True)
class ConsensusSpec:
    """Pins the consensus method and, where applicable, its static clusterer."""

    method: str
    clusterer: ClustererSpec | None = None
    seed: int = 0

    def __post_init__(self):
        if self.method not in CONSENSUS_METHODS:
            raise ValueError(f"unknown consensus method {self.method!r}")
        if self.method == "average-louvain":
            if self.clusterer is not None:
                raise ValueError("average-louvain does not take a static clusterer")
        elif self.clusterer is None:
            raise ValueError(f"{self.method} needs a static clusterer")


def sum_graph(network: DynamicNetwork, start: int, end: int) -> WeightedGraph:
    """Weighted union of the segment's snapshots; weight = occurrence count."""
    weights: dict[tuple[str, str], float] = {}
    nodes: set[str] = set()
    for j in range(start, end + 1):
        g = network[j]
        nodes |= g.nodes
        for e in g.edges:
            weights[e] = weights.get(e, 0.0) + 1.0
    return WeightedGraph(nodes, weights)


def consensus_sum_graph(
    network: DynamicNetwork, segment: tuple[int, int], clusterer: ClustererSpec
) -> Partition:
    start, end = segment
    g = sum_graph(network, start, end)
    if not g.nodes:
        raise ValueError("segment has no nodes")
    return cluster(g, clusterer)


def consensus_average_louvain(
    network: DynamicNetwork, segment: tuple[int, int], seed: int
) -> Partition:
    start, end = segment
    nodes = network.segment_nodes(start, end)
    if not nodes:
        raise ValueError("segment has no nodes")
    graphs = []
    for j in range(start, end + 1):
        g = network[j]
        graphs.append(WeightedGraph(nodes, {e: 1.0 for e in g.edges}))
    return louvain_multi(graphs, seed)


def co_occurrence_weights(
    network: DynamicNetwork, segment: tuple[int, int], clusterer: ClustererSpec
) -> dict[tuple[str, str], float]:
    """Fraction of shared snapshots placing each node pair in one cluster.

    Pairs never placed together are absent; the denominator counts only
    snapshots where both nodes are present.
    """
    start, end = segment
    together: dict[tuple[str, str], int] = {}
    shared: dict[tuple[str, str], int] = {}
    prev: Partition | None = None
    for j in range(start, end + 1):
        g = network[j]
        if not g.nodes:
            continue
        spec_j = ClustererSpec(
            clusterer.kind, derive_seed(clusterer.seed, "cm-snapshot", j), clusterer.walk_length
        )
        # the initialized variant chains each snapshot from its predecessor
        p = cluster(WeightedGraph.from_snapshot(g), spec_j, init=prev)
        prev = p
        ordered = sorted(g.nodes)
        assign = p.assignment
        for idx, u in enumerate(ordered):
            for v in ordered[idx + 1:]:
                key = (u, v)
                shared[key] = shared.get(key, 0) + 1
                if assign[u] == assign[v]:
                    together[key] = together.get(key, 0) + 1
    return {
        key: together[key] / shared[key]
        for key in together
        if together[key] > 0
    }


def consensus_matrix(
    network: DynamicNetwork, segment: tuple[int, int], clusterer: ClustererSpec
) -> Partition:
    start, end = segment
    nodes = network.segment_nodes(start, end)
    if not nodes:
        raise ValueError("segment has no nodes")
    weights = co_occurrence_weights(network, segment, clusterer)
    m_graph = WeightedGraph(nodes, weights)
    final_spec = ClustererSpec(
        clusterer.kind, derive_seed(clusterer.seed, "cm-final"), clusterer.walk_length
    )
    return cluster(m_graph, final_spec)


def segment_partition(
    network: DynamicNetwork, segment: tuple[int, int], spec: ConsensusSpec
) -> Partition:
    """Consensus partition of one segment under a deterministic derived seed."""
    start, end = segment
    seg_seed = derive_seed(spec.seed, "segment", start, end)
    if spec.method == "sum-graph":
        sub = ClustererSpec(spec.clusterer.kind, seg_seed, spec.clusterer.walk_length)
        return consensus_sum_graph(network, segment, sub)
    if spec.method == "average-louvain":
        return consensus_average_louvain(network, segment, seg_seed)
    sub = ClustererSpec(spec.clusterer.kind, seg_seed, spec.clusterer.walk_length)
    return consensus_matrix(network, segment, sub)
