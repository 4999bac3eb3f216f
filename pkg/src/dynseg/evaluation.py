"""Evaluation measures: partition similarity metrics, ground-truth
similarity on the segmentation / partition / joint axes, time-point
ranking, change-point classification summaries, and a paired t-test.

All partition metrics are 1 exactly on identical groupings.  Similarity of
two solution outputs is measured by comparing derived partitions: the
time-point partition (segmentation axis), per-snapshot segment partitions
(partition axis), or the node-time partition (both axes at once).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np
from scipy import special, stats

from .dyngraph import DynamicNetwork, Partition, ScdOutput


class PartitionMetric(str, Enum):
    NMI = "nmi"
    AMI = "ami"
    ARI = "ari"
    VM = "vm"


# ---------------------------------------------------------------------------
# Contingency machinery
# ---------------------------------------------------------------------------

def _aligned_labels(p1: Partition, p2: Partition) -> tuple[np.ndarray, np.ndarray]:
    if p1.domain != p2.domain:
        raise ValueError("partitions must share the same domain")
    nodes = sorted(p1.domain)
    dense1: dict[int, int] = {}
    dense2: dict[int, int] = {}
    l1 = np.empty(len(nodes), dtype=np.int64)
    l2 = np.empty(len(nodes), dtype=np.int64)
    for i, u in enumerate(nodes):
        c1 = p1.assignment[u]
        c2 = p2.assignment[u]
        l1[i] = dense1.setdefault(c1, len(dense1))
        l2[i] = dense2.setdefault(c2, len(dense2))
    return l1, l2


def _contingency(l1: np.ndarray, l2: np.ndarray) -> np.ndarray:
    r = int(l1.max()) + 1
    c = int(l2.max()) + 1
    table = np.zeros((r, c), dtype=np.int64)
    np.add.at(table, (l1, l2), 1)
    return table


def _entropy(counts: np.ndarray, n: int) -> float:
    p = counts[counts > 0] / n
    return float(-(p * np.log(p)).sum())


def _mutual_information(table: np.ndarray, n: int) -> float:
    a = table.sum(axis=1)
    b = table.sum(axis=0)
    mi = 0.0
    rows, cols = np.nonzero(table)
    for i, j in zip(rows, cols):
        nij = table[i, j]
        mi += (nij / n) * math.log(n * nij / (a[i] * b[j]))
    return mi


def _expected_mutual_information(table: np.ndarray, n: int) -> float:
    """Expected MI of two partitions with these marginals under the
    hypergeometric (fixed-marginals permutation) model."""
    a = table.sum(axis=1).astype(np.int64)
    b = table.sum(axis=0).astype(np.int64)
    emi = 0.0
    gln = special.gammaln
    for ai in a:
        for bj in b:
            lo = max(1, ai + bj - n)
            hi = min(ai, bj)
            if hi < lo:
                continue
            nij = np.arange(lo, hi + 1)
            term1 = (nij / n) * np.log(n * nij / (ai * bj))
            log_prob = (
                gln(ai + 1)
                + gln(bj + 1)
                + gln(n - ai + 1)
                + gln(n - bj + 1)
                - gln(n + 1)
                - gln(nij + 1)
                - gln(ai - nij + 1)
                - gln(bj - nij + 1)
                - gln(n - ai - bj + nij + 1)
            )
            emi += float((term1 * np.exp(log_prob)).sum())
    return emi


def vmeasure_components(p1: Partition, p2: Partition) -> tuple[float, float, float]:
    """(homogeneity, completeness, v-measure) treating p1 as the reference."""
    l1, l2 = _aligned_labels(p1, p2)
    n = len(l1)
    table = _contingency(l1, l2)
    h1 = _entropy(table.sum(axis=1), n)
    h2 = _entropy(table.sum(axis=0), n)
    mi = _mutual_information(table, n)
    hom = 1.0 if h1 == 0 else mi / h1  # 1 - H(p1|p2)/H(p1)
    com = 1.0 if h2 == 0 else mi / h2
    if hom + com == 0:
        return hom, com, 0.0
    return hom, com, 2.0 * hom * com / (hom + com)


def partition_similarity(metric: PartitionMetric, p1: Partition, p2: Partition) -> float:
    if p1.domain != p2.domain:
        raise ValueError("partitions must share the same domain")
    if p1.same_grouping(p2):
        return 1.0
    l1, l2 = _aligned_labels(p1, p2)
    n = len(l1)
    table = _contingency(l1, l2)

    if metric is PartitionMetric.ARI:
        a = table.sum(axis=1)
        b = table.sum(axis=0)
        index = float((table * (table - 1) // 2).sum())
        sum_a = float((a * (a - 1) // 2).sum())
        sum_b = float((b * (b - 1) // 2).sum())
        pairs = n * (n - 1) / 2
        expected = sum_a * sum_b / pairs
        max_index = 0.5 * (sum_a + sum_b)
        if max_index == expected:
            return 0.0
        return (index - expected) / (max_index - expected)

    h1 = _entropy(table.sum(axis=1), n)
    h2 = _entropy(table.sum(axis=0), n)
    mi = _mutual_information(table, n)

    if metric is PartitionMetric.NMI:
        normalizer = 0.5 * (h1 + h2)
        if normalizer == 0:
            return 0.0
        return mi / normalizer

    if metric is PartitionMetric.AMI:
        emi = _expected_mutual_information(table, n)
        denom = 0.5 * (h1 + h2) - emi
        if abs(denom) < 1e-15:
            return 0.0
        return (mi - emi) / denom

    return vmeasure_components(p1, p2)[2]


# ---------------------------------------------------------------------------
# Output similarity
# ---------------------------------------------------------------------------

def time_point_partition(output: ScdOutput) -> Partition:
    """Snapshot indices grouped by the segment containing them."""
    assign = {
        str(j): output.change_points.seg_index(j) for j in range(output.k)
    }
    return Partition(assign)


def sim_t(o1: ScdOutput, o2: ScdOutput, metric: PartitionMetric) -> float:
    if o1.k != o2.k:
        raise ValueError("outputs cover different numbers of snapshots")
    return partition_similarity(metric, time_point_partition(o1), time_point_partition(o2))


def sim_p(
    o1: ScdOutput,
    o2: ScdOutput,
    metric: PartitionMetric,
    network: DynamicNetwork | None = None,
) -> float:
    """Mean per-snapshot similarity of the covering segment partitions.

    Both partitions are restricted to the snapshot's node set when the
    network is provided, else to their common domain.
    """
    if o1.k != o2.k:
        raise ValueError("outputs cover different numbers of snapshots")
    total = 0.0
    for j in range(o1.k):
        p1 = o1.partition_at(j)
        p2 = o2.partition_at(j)
        scope = network[j].nodes if network is not None else (p1.domain & p2.domain)
        q1 = p1.restrict(scope)
        q2 = p2.restrict(scope)
        if not q1.assignment and not q2.assignment:
            total += 1.0
            continue
        total += partition_similarity(metric, q1, q2)
    return total / o1.k


def node_time_partition(
    output: ScdOutput, elements: Sequence[tuple[str, int]]
) -> Partition:
    """Cluster node-time pairs: together iff same segment and same cluster there."""
    assign: dict[str, int] = {}
    keys: dict[tuple[int, int], int] = {}
    for u, t in elements:
        seg = output.change_points.seg_index(t)
        cid = output.partitions[seg].assignment[u]
        key = (seg, cid)
        assign[f"{u}\x1f{t}"] = keys.setdefault(key, len(keys))
    return Partition(assign)


def sim_b(
    o1: ScdOutput,
    o2: ScdOutput,
    metric: PartitionMetric,
    network: DynamicNetwork | None = None,
) -> float:
    if o1.k != o2.k:
        raise ValueError("outputs cover different numbers of snapshots")
    elements: list[tuple[str, int]] = []
    for t in range(o1.k):
        if network is not None:
            scope = network[t].nodes
        else:
            scope = o1.partition_at(t).domain & o2.partition_at(t).domain
        elements.extend((u, t) for u in sorted(scope))
    if not elements:
        raise ValueError("empty node-time domain")
    return partition_similarity(
        metric,
        node_time_partition(o1, elements),
        node_time_partition(o2, elements),
    )


# ---------------------------------------------------------------------------
# Time-point ranking and change-point classification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TimePointRanking:
    """Score per candidate time point t in [1, k-1]; lower ranks higher."""

    scores: dict[int, float]
    k: int

    def __post_init__(self):
        expected = set(range(1, self.k))
        if set(self.scores) != expected:
            raise ValueError("ranking must cover every t in [1, k-1]")

    def ordered(self) -> list[int]:
        """Time points from most to least change-point-like; ties by smaller t."""
        return sorted(self.scores, key=lambda t: (self.scores[t], t))


def ranking_from_cscd(table) -> TimePointRanking:
    """Score each time point by the smallest segment count whose solution uses it."""
    k = table.k
    scores: dict[int, float] = {}
    for l in sorted(table.entries):
        for t in table.entries[l].output.change_points.points:
            if t not in scores:
                scores[t] = float(l)
    for t in range(1, k):
        if t not in scores:
            scores[t] = float(k)
    return TimePointRanking(scores, k)


@dataclass(frozen=True)
class ClassificationScores:
    aupr: float
    max_f: float
    auroc: float


def change_point_classification(
    ranking: TimePointRanking, truth: ScdOutput | Sequence[int]
) -> ClassificationScores:
    """Sweep the ranked candidates top-1 .. top-(k-1) against the true points."""
    if isinstance(truth, ScdOutput):
        positives = set(truth.change_points.points)
    else:
        positives = set(int(t) for t in truth)
    k = ranking.k
    candidates = ranking.ordered()
    if not positives or positives >= set(range(1, k)):
        raise ValueError(
            "classification needs at least one true change point and one true non-change point"
        )
    num_pos = len(positives)
    num_neg = (k - 1) - num_pos

    aupr = 0.0
    max_f = 0.0
    auroc = 0.0
    tp = 0
    prev_recall = 0.0
    prev_fpr = 0.0
    prev_tpr = 0.0
    for i, t in enumerate(candidates, start=1):
        if t in positives:
            tp += 1
        precision = tp / i
        recall = tp / num_pos
        fp = i - tp
        fpr = fp / num_neg
        if precision + recall > 0:
            max_f = max(max_f, 2 * precision * recall / (precision + recall))
        aupr += (recall - prev_recall) * precision
        auroc += (fpr - prev_fpr) * (recall + prev_tpr) / 2.0
        prev_recall = recall
        prev_fpr = fpr
        prev_tpr = recall
    return ClassificationScores(aupr=aupr, max_f=max_f, auroc=auroc)


# ---------------------------------------------------------------------------
# Paired t-test
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TTestResult:
    statistic: float
    p_value: float
    degenerate: bool = False


def paired_t_test(xs: Sequence[float], ys: Sequence[float]) -> TTestResult:
    """Two-sided paired t-test on index-matched samples.

    Zero-variance differences are degenerate: all-zero differences give
    p = 1, a constant nonzero difference is flagged and reported as p = 0.
    """
    if len(xs) != len(ys):
        raise ValueError("paired samples must have equal length")
    n = len(xs)
    if n < 2:
        raise ValueError("need at least two pairs")
    diffs = np.asarray(xs, dtype=float) - np.asarray(ys, dtype=float)
    sd = float(diffs.std(ddof=1))
    mean = float(diffs.mean())
    if sd == 0.0:
        if mean == 0.0:
            return TTestResult(statistic=0.0, p_value=1.0)
        return TTestResult(
            statistic=math.copysign(math.inf, mean), p_value=0.0, degenerate=True
        )
    t = mean / (sd / math.sqrt(n))
    p = 2.0 * float(stats.t.sf(abs(t), n - 1))
    return TTestResult(statistic=t, p_value=p)
