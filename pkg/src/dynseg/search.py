"""Search over change point sets.

All three strategies fill a table with one best output per possible number
of segments; the final solution is the table entry maximizing a penalized
likelihood criterion.  Segment partitions and additive segment scores are
memoized by (start, end), so the number of consensus-clustering calls is
exactly the number of distinct segments evaluated: (k^2+k)/2 for the
exhaustive dynamic program, at most that for top-down splitting, and at
most 4k-5 for bottom-up merging.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from . import objectives
from .consensus import ConsensusSpec, segment_partition
from .dyngraph import ChangePointSet, DynamicNetwork, Partition, ScdOutput
from .objectives import Criterion, ObjectiveSpec
from .static_cluster import ClustererSpec

STRATEGIES = ("exhaustive", "topdown", "bottomup")


def default_consensus() -> ConsensusSpec:
    return ConsensusSpec("sum-graph", ClustererSpec("walktrap"))


@dataclass(frozen=True)
class SearchSpec:
    strategy: str = "bottomup"
    objective: ObjectiveSpec = field(default_factory=lambda: ObjectiveSpec.qb(Criterion.BIC))
    selection: Criterion = Criterion.BIC
    consensus: ConsensusSpec = field(default_factory=default_consensus)
    seed: int = 0

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown search strategy {self.strategy!r}")


@dataclass(frozen=True)
class CscdEntry:
    """Best output found with exactly this number of segments."""

    output: ScdOutput
    score: float  # per-l objective, user-facing normalization
    log_likelihood: float
    num_parameters: int


@dataclass
class CscdTable:
    entries: dict[int, CscdEntry]
    consensus_calls: int
    num_observations: int
    objective: ObjectiveSpec

    @property
    def k(self) -> int:
        return max(self.entries)

    def entry(self, l: int) -> CscdEntry:
        if l not in self.entries:
            raise ValueError(f"no table entry for l={l} (valid: 1..{self.k})")
        return self.entries[l]

    def selection_score(self, l: int, criterion: Criterion) -> float:
        e = self.entry(l)
        if criterion is Criterion.AIC:
            weight = 1.0
        else:
            if self.num_observations == 0:
                raise ValueError("BIC undefined: network has no node pairs")
            weight = 0.5 * math.log(self.num_observations)
        return e.log_likelihood - weight * e.num_parameters

    def select(self, criterion: Criterion) -> int:
        """Number of segments maximizing the criterion; ties prefer fewer."""
        best_l, best = None, None
        for l in sorted(self.entries):
            s = self.selection_score(l, criterion)
            if best is None or s > best:
                best_l, best = l, s
        return best_l


class _SegmentScorer:
    """Memoizes per-segment consensus partitions and additive scores.

    The per-segment score composes additively across a segmentation: for
    fit-based objectives it is the plain sum of per-snapshot fits (the 1/k
    normalization is constant per network and argmax-invariant); for
    criterion-based objectives it is the segment log-likelihood minus the
    penalty weight times the segment's parameter count.
    """

    def __init__(self, network: DynamicNetwork, spec: SearchSpec):
        self.network = network
        self.consensus = ConsensusSpec(
            spec.consensus.method, spec.consensus.clusterer, spec.seed
        )
        self.objective = spec.objective
        if self.objective.family == "qb":
            self.weight = objectives.penalty_weight(network, self.objective.criterion)
        else:
            self.weight = None
        self.calls = 0
        self._partitions: dict[tuple[int, int], Partition] = {}
        self._scores: dict[tuple[int, int], float] = {}

    def partition(self, start: int, end: int) -> Partition:
        key = (start, end)
        if key not in self._partitions:
            self._partitions[key] = segment_partition(self.network, key, self.consensus)
            self.calls += 1
        return self._partitions[key]

    def score(self, start: int, end: int) -> float:
        key = (start, end)
        if key not in self._scores:
            p = self.partition(start, end)
            if self.objective.family == "qp":
                s = sum(
                    objectives.snapshot_fit(self.objective.fit, p, self.network[j])
                    for j in range(start, end + 1)
                )
            else:
                ll = objectives.segment_log_likelihood(self.network, start, end, p)
                n_par = p.num_clusters * (p.num_clusters + 1) // 2
                s = ll - self.weight * n_par
            self._scores[key] = s
        return self._scores[key]

    def output_for(self, points: tuple[int, ...]) -> ScdOutput:
        cps = ChangePointSet(points, self.network.k)
        parts = tuple(self.partition(s, e) for s, e in cps.segmentation())
        return ScdOutput(cps, parts)

    def raw_score(self, points: tuple[int, ...]) -> float:
        """Canonical additive score of a change point set, left to right."""
        cps = ChangePointSet(points, self.network.k)
        total = 0.0
        for s, e in cps.segmentation():
            total += self.score(s, e)
        return total

    def entry_for(self, points: tuple[int, ...]) -> CscdEntry:
        out = self.output_for(points)
        raw = self.raw_score(points)
        score = raw / self.network.k if self.objective.family == "qp" else raw
        return CscdEntry(
            output=out,
            score=score,
            log_likelihood=objectives.log_likelihood(out, self.network),
            num_parameters=objectives.num_parameters(out),
        )

    def table(self, per_l_points: dict[int, tuple[int, ...]]) -> CscdTable:
        entries = {l: self.entry_for(pts) for l, pts in per_l_points.items()}
        return CscdTable(
            entries=entries,
            consensus_calls=self.calls,
            num_observations=objectives.num_observations(self.network),
            objective=self.objective,
        )


def exhaustive_search(network: DynamicNetwork, spec: SearchSpec) -> CscdTable:
    """Optimal table via dynamic programming over last-segment start times.

    best[i][l] scores the best l-segment solution of the first i snapshots;
    it extends best[t][l-1] with the one-segment suffix [t, i-1].  Ties keep
    the smallest last-segment start time.
    """
    scorer = _SegmentScorer(network, spec)
    k = network.k
    best: list[dict[int, float]] = [dict() for _ in range(k + 1)]
    back: list[dict[int, int]] = [dict() for _ in range(k + 1)]
    best[0][0] = 0.0
    for i in range(1, k + 1):
        for l in range(1, i + 1):
            chosen_t, chosen = None, None
            t_range = (0,) if l == 1 else range(l - 1, i)
            for t in t_range:
                if l - 1 not in best[t]:
                    continue
                cand = best[t][l - 1] + scorer.score(t, i - 1)
                if chosen is None or cand > chosen:
                    chosen_t, chosen = t, cand
            best[i][l] = chosen
            back[i][l] = chosen_t

    per_l: dict[int, tuple[int, ...]] = {}
    for l in range(1, k + 1):
        points: list[int] = []
        i, ll = k, l
        while ll > 1:
            t = back[i][ll]
            points.append(t)
            i, ll = t, ll - 1
        per_l[l] = tuple(reversed(points))
    return scorer.table(per_l)


def top_down_search(network: DynamicNetwork, spec: SearchSpec) -> CscdTable:
    """Greedy splitting from one whole-network segment down to singletons.

    Each iteration inserts the untaken time point whose split yields the
    largest objective gain; equal gains go to the smallest time point.
    """
    scorer = _SegmentScorer(network, spec)
    k = network.k
    points: list[int] = []
    per_l: dict[int, tuple[int, ...]] = {1: ()}
    scorer.score(0, k - 1)
    for l in range(2, k + 1):
        taken = set(points)
        cps = ChangePointSet(tuple(points), k)
        best_t, best_gain = None, None
        for t in range(1, k):
            if t in taken:
                continue
            start, end = cps.segmentation().segments[cps.seg_index(t)]
            gain = (
                scorer.score(start, t - 1)
                + scorer.score(t, end)
                - scorer.score(start, end)
            )
            if best_gain is None or gain > best_gain:
                best_t, best_gain = t, gain
        points.append(best_t)
        points.sort()
        per_l[l] = tuple(points)
    return scorer.table(per_l)


def bottom_up_search(network: DynamicNetwork, spec: SearchSpec) -> CscdTable:
    """Greedy merging from singleton segments up to one whole-network segment.

    Each iteration removes the change point whose merge yields the largest
    objective gain; equal gains go to the leftmost pair.
    """
    scorer = _SegmentScorer(network, spec)
    k = network.k
    points = list(range(1, k))
    per_l: dict[int, tuple[int, ...]] = {k: tuple(points)}
    for j in range(k):
        scorer.score(j, j)
    for l in range(k - 1, 0, -1):
        cps = ChangePointSet(tuple(points), k)
        segs = cps.segmentation().segments
        best_idx, best_gain = None, None
        for idx in range(len(segs) - 1):
            (s1, e1), (s2, e2) = segs[idx], segs[idx + 1]
            gain = scorer.score(s1, e2) - scorer.score(s1, e1) - scorer.score(s2, e2)
            if best_gain is None or gain > best_gain:
                best_idx, best_gain = idx, gain
        points.remove(segs[best_idx + 1][0])
        per_l[l] = tuple(points)
    return scorer.table(per_l)


_SEARCHES = {
    "exhaustive": exhaustive_search,
    "topdown": top_down_search,
    "bottomup": bottom_up_search,
}


def build_table(network: DynamicNetwork, spec: SearchSpec) -> CscdTable:
    return _SEARCHES[spec.strategy](network, spec)


def solve_cscd(network: DynamicNetwork, l: int, spec: SearchSpec) -> ScdOutput:
    """Best output with exactly l segments under the spec's strategy."""
    if not 1 <= l <= network.k:
        raise ValueError(f"l={l} out of range [1, {network.k}]")
    return build_table(network, spec).entry(l).output


def solve_scd(network: DynamicNetwork, spec: SearchSpec) -> ScdOutput:
    """Best output over all segment counts under the selection criterion."""
    table = build_table(network, spec)
    return table.entry(table.select(spec.selection)).output
