"""Weighted static-graph community detection primitives.

Four methods: Louvain, Louvain initialized from a given partition,
asynchronous label propagation, and random-walk agglomerative clustering.
All of them are deterministic given (graph, spec): randomized node orders
come from the spec's seed and every tie-break is pinned.  Returned
partitions cover exactly the graph's nodes and carry canonical cluster ids
(0, 1, ... ordered by each cluster's smallest member).
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from ._seeds import rng_for
from .dyngraph import Partition, Snapshot

_GAIN_TOL = 1e-12


class WeightedGraph:
    """Undirected graph with positive edge weights and no self-loops."""

    __slots__ = ("nodes", "edges")

    def __init__(self, nodes, edges: Mapping[tuple[str, str], float]):
        node_set = set(nodes)
        canon: dict[tuple[str, str], float] = {}
        for (u, v), w in edges.items():
            if u == v:
                raise ValueError(f"self-loop on node {u!r}")
            if w <= 0:
                raise ValueError(f"non-positive weight on edge ({u!r}, {v!r})")
            node_set.add(u)
            node_set.add(v)
            canon[(u, v) if u <= v else (v, u)] = float(w)
        self.nodes: frozenset[str] = frozenset(node_set)
        self.edges: dict[tuple[str, str], float] = canon

    @classmethod
    def from_snapshot(cls, g: Snapshot) -> "WeightedGraph":
        return cls(g.nodes, {e: 1.0 for e in g.edges})

    @property
    def num_nodes(self) -> int:
        return len(self.nodes)

    def total_weight(self) -> float:
        return sum(self.edges.values())


@dataclass(frozen=True)
class ClustererSpec:
    """Pins one static method together with everything that makes it deterministic."""

    kind: str  # louvain | stabilized-louvain | label-propagation | walktrap
    seed: int = 0
    walk_length: int = 4

    KINDS = ("louvain", "stabilized-louvain", "label-propagation", "walktrap")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown clusterer kind {self.kind!r}")
        if self.walk_length < 1:
            raise ValueError("walk_length must be positive")


def _index_nodes(nodes) -> tuple[list[str], dict[str, int]]:
    labels = sorted(nodes)
    return labels, {u: i for i, u in enumerate(labels)}


def _adjacency(graph: WeightedGraph, index: dict[str, int], n: int) -> list[dict[int, float]]:
    adj: list[dict[int, float]] = [dict() for _ in range(n)]
    for (u, v), w in graph.edges.items():
        iu, iv = index[u], index[v]
        adj[iu][iv] = adj[iu].get(iv, 0.0) + w
        adj[iv][iu] = adj[iv].get(iu, 0.0) + w
    return adj


# ---------------------------------------------------------------------------
# Louvain core, shared by the plain, initialized and multi-graph variants.
# The multi-graph variant scores each candidate move by the mean modularity
# gain across all graphs and contracts every graph in parallel, so all
# graphs always share one partition.
# ---------------------------------------------------------------------------

class _LevelGraph:
    __slots__ = ("adj", "loop", "deg", "two_m")

    def __init__(self, adj: list[dict[int, float]], loop: list[float]):
        self.adj = adj
        self.loop = loop
        self.deg = [sum(nbrs.values()) + 2.0 * loop[i] for i, nbrs in enumerate(adj)]
        self.two_m = sum(self.deg)


def _level_modularity(lg: _LevelGraph, comm: list[int]) -> float:
    if lg.two_m == 0:
        return 0.0
    tot: dict[int, float] = {}
    inner: dict[int, float] = {}
    for u, d in enumerate(lg.deg):
        c = comm[u]
        tot[c] = tot.get(c, 0.0) + d
        inner[c] = inner.get(c, 0.0) + 2.0 * lg.loop[u]
    for u, nbrs in enumerate(lg.adj):
        cu = comm[u]
        for v, w in nbrs.items():
            if u < v and comm[v] == cu:
                inner[cu] = inner.get(cu, 0.0) + 2.0 * w
    q = 0.0
    for c, t in tot.items():
        q += inner.get(c, 0.0) / lg.two_m - (t / lg.two_m) ** 2
    return q


def _avg_modularity(graphs: list[_LevelGraph], comm: list[int], num_graphs: int) -> float:
    return sum(_level_modularity(lg, comm) for lg in graphs) / num_graphs


def _one_level(
    graphs: list[_LevelGraph], comm: list[int], rng: np.random.Generator, num_graphs: int
) -> bool:
    """Local-moving phase on the current level; True if any node moved."""
    n = len(comm)
    tots: list[dict[int, float]] = []
    for lg in graphs:
        tot: dict[int, float] = {}
        for u, d in enumerate(lg.deg):
            tot[comm[u]] = tot.get(comm[u], 0.0) + d
        tots.append(tot)

    moved_any = False
    while True:
        moved = False
        for u in rng.permutation(n):
            u = int(u)
            a = comm[u]
            for lg, tot in zip(graphs, tots):
                tot[a] -= lg.deg[u]
            # weight from u to each candidate community, per graph
            links: list[dict[int, float]] = []
            candidates: set[int] = {a}
            for lg in graphs:
                w_uc: dict[int, float] = {}
                for v, w in lg.adj[u].items():
                    c = comm[v]
                    w_uc[c] = w_uc.get(c, 0.0) + w
                links.append(w_uc)
                candidates.update(w_uc)

            def gain(c: int) -> float:
                g = 0.0
                for lg, tot, w_uc in zip(graphs, tots, links):
                    if lg.two_m == 0:
                        continue
                    g += (2.0 / lg.two_m) * (
                        w_uc.get(c, 0.0) - lg.deg[u] * tot.get(c, 0.0) / lg.two_m
                    )
                return g / num_graphs

            stay = gain(a)
            best_c, best_gain = a, stay
            for c in sorted(candidates):
                if c == a:
                    continue
                g = gain(c)
                if g > best_gain + _GAIN_TOL:
                    best_c, best_gain = c, g
            comm[u] = best_c
            for lg, tot in zip(graphs, tots):
                tot[best_c] = tot.get(best_c, 0.0) + lg.deg[u]
            if best_c != a:
                moved = True
        if not moved:
            break
        moved_any = True
    return moved_any


def _contract(
    graphs: list[_LevelGraph], comm: list[int]
) -> tuple[list[_LevelGraph], dict[int, int]]:
    ids = sorted(set(comm))
    renum = {c: i for i, c in enumerate(ids)}
    new_graphs: list[_LevelGraph] = []
    for lg in graphs:
        n_new = len(ids)
        adj: list[dict[int, float]] = [dict() for _ in range(n_new)]
        loop = [0.0] * n_new
        for u, l in enumerate(lg.loop):
            loop[renum[comm[u]]] += l
        for u, nbrs in enumerate(lg.adj):
            cu = renum[comm[u]]
            for v, w in nbrs.items():
                if u > v:
                    continue
                cv = renum[comm[v]]
                if cu == cv:
                    loop[cu] += w
                else:
                    a, b = (cu, cv) if cu < cv else (cv, cu)
                    adj[a][b] = adj[a].get(b, 0.0) + w
                    adj[b][a] = adj[b].get(a, 0.0) + w
        new_graphs.append(_LevelGraph(adj, loop))
    return new_graphs, renum


def _louvain_core(
    adjs: list[list[dict[int, float]]],
    n: int,
    seed: int,
    init: list[int] | None = None,
) -> tuple[list[int], list[float]]:
    """Shared driver; returns (community per node, modularity at phase bounds)."""
    num_graphs = len(adjs)
    graphs = [_LevelGraph(adj, [0.0] * n) for adj in adjs]
    membership = list(range(n))
    comm = list(init) if init is not None else list(range(n))
    rng = rng_for(seed, "louvain")
    history = [_avg_modularity(graphs, comm, num_graphs)]
    while True:
        moved = _one_level(graphs, comm, rng, num_graphs)
        history.append(_avg_modularity(graphs, comm, num_graphs))
        if not moved:
            break
        graphs, renum = _contract(graphs, comm)
        membership = [renum[comm[membership[orig]]] for orig in range(n)]
        comm = list(range(len(renum)))
    final = [comm[membership[orig]] for orig in range(n)]
    return final, history


def _multi_adjacency(
    graphs: Sequence[WeightedGraph], labels: list[str], index: dict[str, int]
) -> list[list[dict[int, float]]]:
    return [_adjacency(g, index, len(labels)) for g in graphs]


def louvain_multi(
    graphs: Sequence[WeightedGraph], seed: int, init: Partition | None = None
) -> Partition:
    """Louvain over several graphs at once, averaging move gains across them."""
    universe: set[str] = set()
    for g in graphs:
        universe |= g.nodes
    if not universe:
        raise ValueError("no nodes to cluster")
    labels, index = _index_nodes(universe)
    adjs = _multi_adjacency(graphs, labels, index)
    init_ids = _init_ids(init, labels) if init is not None else None
    final, _ = _louvain_core(adjs, len(labels), seed, init_ids)
    return Partition({labels[i]: c for i, c in enumerate(final)}).canonical()


def _init_ids(init: Partition, labels: list[str]) -> list[int]:
    # nodes absent from init start as fresh singletons
    ids = []
    next_id = 0
    seen: dict[int, int] = {}
    for u in labels:
        if u in init.assignment:
            cid = init.assignment[u]
            if cid not in seen:
                seen[cid] = next_id
                next_id += 1
            ids.append(seen[cid])
        else:
            ids.append(next_id)
            next_id += 1
    return ids


def louvain(graph: WeightedGraph, seed: int) -> Partition:
    """Greedy modularity maximization by node moves and graph contraction."""
    return louvain_multi([graph], seed)


def stabilized_louvain(graph: WeightedGraph, init: Partition, seed: int) -> Partition:
    """Louvain seeded from a previous partition instead of all-singletons."""
    return louvain_multi([graph], seed, init=init.restrict(graph.nodes))


def louvain_with_history(graph: WeightedGraph, seed: int) -> tuple[Partition, list[float]]:
    """Like louvain() but also reports modularity at each phase boundary."""
    labels, index = _index_nodes(graph.nodes)
    if not labels:
        raise ValueError("no nodes to cluster")
    adj = _adjacency(graph, index, len(labels))
    final, history = _louvain_core([adj], len(labels), seed)
    return Partition({labels[i]: c for i, c in enumerate(final)}).canonical(), history


# ---------------------------------------------------------------------------
# Label propagation
# ---------------------------------------------------------------------------

def label_propagation(graph: WeightedGraph, seed: int, max_sweeps: int = 100) -> Partition:
    """Asynchronous weighted-majority label propagation.

    Node order is reshuffled from the seed each sweep; among maximal-weight
    labels the smallest id wins, which also stops label thrashing.
    """
    labels, index = _index_nodes(graph.nodes)
    if not labels:
        raise ValueError("no nodes to cluster")
    n = len(labels)
    adj = _adjacency(graph, index, n)
    lab = list(range(n))
    rng = rng_for(seed, "lpa")
    for _ in range(max_sweeps):
        changed = False
        for u in rng.permutation(n):
            u = int(u)
            if not adj[u]:
                continue
            weight: dict[int, float] = {}
            for v, w in adj[u].items():
                weight[lab[v]] = weight.get(lab[v], 0.0) + w
            top = max(weight.values())
            new = min(l for l, w in weight.items() if w >= top - _GAIN_TOL)
            if new != lab[u]:
                lab[u] = new
                changed = True
        if not changed:
            break
    return Partition({labels[i]: l for i, l in enumerate(lab)}).canonical()


# ---------------------------------------------------------------------------
# Random-walk agglomerative clustering
# ---------------------------------------------------------------------------

def walktrap(graph: WeightedGraph, walk_length: int = 4) -> Partition:
    """Agglomerate communities by distance between short random-walk profiles.

    Adjacent community pairs merge in order of the smallest approximate
    squared-distance increase; the dendrogram is cut at the level with the
    highest weighted modularity.  Degree-0 nodes stay singletons.
    """
    labels, index = _index_nodes(graph.nodes)
    if not labels:
        raise ValueError("no nodes to cluster")
    n = len(labels)
    adj = _adjacency(graph, index, n)
    active = [u for u in range(n) if adj[u]]
    isolated = [u for u in range(n) if not adj[u]]
    if not active:
        return Partition.singletons(labels)

    pos = {u: i for i, u in enumerate(active)}
    na = len(active)
    A = np.zeros((na, na))
    for u in active:
        for v, w in adj[u].items():
            A[pos[u], pos[v]] = w
    deg = A.sum(axis=1)
    P = A / deg[:, None]
    Pt = np.linalg.matrix_power(P, walk_length)
    inv_d = 1.0 / deg  # distance terms are weighted by 1/degree
    two_m = float(deg.sum())

    # community state
    vectors: dict[int, np.ndarray] = {i: Pt[i] for i in range(na)}
    sizes: dict[int, int] = {i: 1 for i in range(na)}
    tot: dict[int, float] = {i: float(deg[i]) for i in range(na)}
    inner: dict[int, float] = {i: 0.0 for i in range(na)}
    cadj: dict[int, dict[int, float]] = {i: {} for i in range(na)}
    for u in active:
        for v, w in adj[u].items():
            if pos[u] < pos[v]:
                cadj[pos[u]][pos[v]] = w
                cadj[pos[v]][pos[u]] = w

    def dist(c1: int, c2: int) -> float:
        delta = vectors[c1] - vectors[c2]
        r2 = float(np.dot(delta * delta, inv_d))
        s1, s2 = sizes[c1], sizes[c2]
        return (s1 * s2) / (s1 + s2) / na * r2

    current: dict[tuple[int, int], float] = {}
    heap: list[tuple[float, int, int]] = []
    for c1, nbrs in cadj.items():
        for c2 in nbrs:
            if c1 < c2:
                ds = dist(c1, c2)
                current[(c1, c2)] = ds
                heap.append((ds, c1, c2))
    heapq.heapify(heap)

    def partition_q() -> float:
        return sum(
            inner[c] / two_m - (tot[c] / two_m) ** 2 for c in sizes
        )

    alive = set(sizes)
    merges: list[tuple[int, int]] = []
    best_q = partition_q()
    best_step = 0
    next_id = na
    while heap:
        ds, c1, c2 = heapq.heappop(heap)
        key = (c1, c2)
        if c1 not in alive or c2 not in alive or current.get(key) != ds:
            continue
        del current[key]
        cid = next_id
        next_id += 1
        cross = cadj[c1].pop(c2)
        cadj[c2].pop(c1)
        s1, s2 = sizes[c1], sizes[c2]
        vectors[cid] = (s1 * vectors[c1] + s2 * vectors[c2]) / (s1 + s2)
        sizes[cid] = s1 + s2
        tot[cid] = tot[c1] + tot[c2]
        inner[cid] = inner[c1] + inner[c2] + 2.0 * cross
        nbrs: dict[int, float] = {}
        for old in (c1, c2):
            for other, w in cadj[old].items():
                nbrs[other] = nbrs.get(other, 0.0) + w
                del cadj[other][old]
        cadj[cid] = nbrs
        for other, w in nbrs.items():
            cadj[other][cid] = w
        for old in (c1, c2):
            alive.discard(old)
            for d in (vectors, sizes, tot, inner, cadj):
                d.pop(old, None)
        alive.add(cid)

        for other in sorted(nbrs):
            dd = dist(cid, other)
            key2 = (other, cid) if other < cid else (cid, other)
            current[key2] = dd
            heapq.heappush(heap, (dd, key2[0], key2[1]))

        merges.append((c1, c2))
        q = partition_q()
        if q > best_q:
            best_q = q
            best_step = len(merges)

    # replay merges up to the best level
    group: dict[int, list[int]] = {i: [active[i]] for i in range(na)}
    next_id = na
    for c1, c2 in merges[:best_step]:
        group[next_id] = group.pop(c1) + group.pop(c2)
        next_id += 1
    clusters = [[labels[u] for u in g] for g in group.values()]
    clusters.extend([[labels[u]] for u in isolated])
    return Partition.from_clusters(clusters).canonical()


# ---------------------------------------------------------------------------
# Dispatch
# ---------------------------------------------------------------------------

def cluster(graph: WeightedGraph, spec: ClustererSpec, init: Partition | None = None) -> Partition:
    if spec.kind == "louvain":
        return louvain(graph, spec.seed)
    if spec.kind == "stabilized-louvain":
        if init is None:
            init = Partition.singletons(graph.nodes)
        return stabilized_louvain(graph, init, spec.seed)
    if spec.kind == "label-propagation":
        return label_propagation(graph, spec.seed)
    return walktrap(graph, spec.walk_length)
