import numpy as np
import pytest

from dynseg.dyngraph import Partition
from dynseg.static_cluster import (
    ClustererSpec,
    WeightedGraph,
    cluster,
    label_propagation,
    louvain,
    louvain_with_history,
    stabilized_louvain,
    walktrap,
)


def _wg(edges, nodes=()):
    return WeightedGraph(nodes, {e: w for e, w in edges.items()})


TWO_TRIANGLES = _wg({
    ("a", "b"): 1, ("b", "c"): 1, ("a", "c"): 1,
    ("d", "e"): 1, ("e", "f"): 1, ("d", "f"): 1,
    ("c", "d"): 1,
})
K4 = _wg({(u, v): 1 for i, u in enumerate("wxyz") for v in "wxyz"[i + 1:]})


def weighted_modularity(g: WeightedGraph, p: Partition) -> float:
    two_m = 2.0 * g.total_weight()
    if two_m == 0:
        return 0.0
    deg = {u: 0.0 for u in g.nodes}
    for (u, v), w in g.edges.items():
        deg[u] += w
        deg[v] += w
    q = 0.0
    for members in p.clusters().values():
        inner = sum(w for (u, v), w in g.edges.items() if u in members and v in members)
        tot = sum(deg[u] for u in members)
        q += 2.0 * inner / two_m - (tot / two_m) ** 2
    return q


def brute_force_best_modularity(g: WeightedGraph) -> float:
    """Exhaustive maximum of weighted modularity over all partitions."""
    nodes = sorted(g.nodes)

    def all_partitions(items):
        if not items:
            yield []
            return
        head, rest = items[0], items[1:]
        for smaller in all_partitions(rest):
            for i in range(len(smaller)):
                yield smaller[:i] + [smaller[i] + [head]] + smaller[i + 1:]
            yield smaller + [[head]]

    best = -1.0
    for blocks in all_partitions(nodes):
        q = weighted_modularity(g, Partition.from_clusters(blocks))
        best = max(best, q)
    return best


class TestWeightedGraph:
    def test_rejects_self_loop(self):
        with pytest.raises(ValueError):
            _wg({("a", "a"): 1})

    def test_rejects_nonpositive_weight(self):
        with pytest.raises(ValueError):
            _wg({("a", "b"): 0})

    def test_canonical_edge_keys(self):
        g = _wg({("b", "a"): 2})
        assert g.edges == {("a", "b"): 2.0}


class TestLouvain:
    def test_two_triangles(self):
        p = louvain(TWO_TRIANGLES, 0)
        assert p.groups() == frozenset(
            [frozenset("abc"), frozenset("def")]
        )
        # matches the exhaustive optimum
        assert weighted_modularity(TWO_TRIANGLES, p) == pytest.approx(
            brute_force_best_modularity(TWO_TRIANGLES)
        )

    def test_edgeless_graph_singletons(self):
        g = WeightedGraph(["x", "y", "z"], {})
        assert louvain(g, 1).groups() == frozenset(
            [frozenset(["x"]), frozenset(["y"]), frozenset(["z"])]
        )

    def test_single_clique_one_cluster(self):
        p = louvain(K4, 0)
        assert p.num_clusters == 1
        assert weighted_modularity(K4, p) == pytest.approx(
            brute_force_best_modularity(K4)
        )

    def test_respects_weights(self):
        # path with one heavy edge: heavy pair clusters together
        g = _wg({("a", "b"): 10, ("b", "c"): 1, ("c", "d"): 10})
        p = louvain(g, 0)
        assert p.assignment["a"] == p.assignment["b"]
        assert p.assignment["c"] == p.assignment["d"]

    def test_determinism(self):
        for seed in (0, 1, 99):
            p1 = louvain(TWO_TRIANGLES, seed)
            p2 = louvain(TWO_TRIANGLES, seed)
            assert p1.assignment == p2.assignment

    def test_modularity_history_non_decreasing(self):
        rng = np.random.default_rng(12)
        for trial in range(10):
            n = 12
            nodes = [f"n{i}" for i in range(n)]
            edges = {}
            for i in range(n):
                for j in range(i + 1, n):
                    if rng.random() < 0.3:
                        edges[(nodes[i], nodes[j])] = float(rng.integers(1, 4))
            if not edges:
                continue
            p, history = louvain_with_history(WeightedGraph(nodes, edges), trial)
            assert all(b >= a - 1e-12 for a, b in zip(history, history[1:]))
            assert history[-1] == pytest.approx(weighted_modularity(
                WeightedGraph(nodes, edges), p))


class TestStabilizedLouvain:
    def test_fixed_point(self):
        base = louvain(TWO_TRIANGLES, 3)
        again = stabilized_louvain(TWO_TRIANGLES, base, 3)
        assert again.assignment == base.assignment

    def test_singleton_init_equals_louvain(self):
        init = Partition.singletons(TWO_TRIANGLES.nodes)
        assert stabilized_louvain(TWO_TRIANGLES, init, 7).assignment == \
            louvain(TWO_TRIANGLES, 7).assignment

    def test_correct_split_kept(self):
        init = Partition.from_clusters([list("abc"), list("def")])
        p = stabilized_louvain(TWO_TRIANGLES, init, 0)
        assert p.groups() == init.groups()

    def test_nodes_missing_from_init_become_singletons(self):
        init = Partition.from_clusters([["a", "b"]])
        p = stabilized_louvain(TWO_TRIANGLES, init, 0)
        assert p.domain == TWO_TRIANGLES.nodes


class TestLabelPropagation:
    def test_edgeless_singletons(self):
        g = WeightedGraph(["p", "q"], {})
        assert label_propagation(g, 0).num_clusters == 2

    def test_single_clique_converges_for_many_seeds(self):
        k5 = _wg({(u, v): 1 for i, u in enumerate("abcde") for v in "abcde"[i + 1:]})
        for seed in range(10):
            assert label_propagation(k5, seed).num_clusters == 1

    def test_disconnected_cliques_stay_apart(self):
        g = _wg({
            ("a", "b"): 1, ("b", "c"): 1, ("a", "c"): 1,
            ("x", "y"): 1, ("y", "z"): 1, ("x", "z"): 1,
        })
        for seed in range(5):
            p = label_propagation(g, seed)
            assert p.num_clusters == 2
            assert p.assignment["a"] != p.assignment["x"]

    def test_determinism(self):
        p1 = label_propagation(TWO_TRIANGLES, 5)
        p2 = label_propagation(TWO_TRIANGLES, 5)
        assert p1.assignment == p2.assignment


class TestWalktrap:
    def test_two_triangles(self):
        p = walktrap(TWO_TRIANGLES, 4)
        assert p.groups() == frozenset([frozenset("abc"), frozenset("def")])
        assert weighted_modularity(TWO_TRIANGLES, p) == pytest.approx(
            brute_force_best_modularity(TWO_TRIANGLES)
        )

    def test_no_cluster_spans_components(self):
        g = _wg({
            ("a", "b"): 1, ("b", "c"): 1, ("a", "c"): 1,
            ("x", "y"): 1, ("y", "z"): 1, ("x", "z"): 1,
        })
        p = walktrap(g, 4)
        for members in p.clusters().values():
            assert members <= {"a", "b", "c"} or members <= {"x", "y", "z"}

    def test_single_clique(self):
        assert walktrap(K4, 4).num_clusters == 1

    def test_isolated_nodes_stay_singletons(self):
        g = WeightedGraph(["lonely"], {("a", "b"): 1.0})
        p = walktrap(g, 4)
        assert p.assignment.keys() == {"lonely", "a", "b"}
        assert {"lonely"} in [set(m) for m in p.clusters().values()]

    def test_edgeless(self):
        g = WeightedGraph(["u", "v"], {})
        assert walktrap(g, 2).num_clusters == 2

    def test_determinism(self):
        assert walktrap(TWO_TRIANGLES, 4).assignment == walktrap(TWO_TRIANGLES, 4).assignment


class TestCommonContracts:
    METHODS = [
        lambda g: louvain(g, 13),
        lambda g: stabilized_louvain(g, Partition.singletons(g.nodes), 13),
        lambda g: label_propagation(g, 13),
        lambda g: walktrap(g, 4),
    ]

    @pytest.mark.parametrize("method_idx", range(4))
    def test_output_covers_exactly_graph_nodes(self, method_idx):
        rng = np.random.default_rng(40 + method_idx)
        for _ in range(5):
            n = int(rng.integers(2, 15))
            nodes = [f"v{i}" for i in range(n)]
            edges = {}
            for i in range(n):
                for j in range(i + 1, n):
                    if rng.random() < 0.25:
                        edges[(nodes[i], nodes[j])] = 1.0
            g = WeightedGraph(nodes, edges)
            p = self.METHODS[method_idx](g)
            assert p.domain == g.nodes
            assert all(len(m) >= 1 for m in p.clusters().values())

    @pytest.mark.parametrize("method_idx", range(4))
    def test_component_safety(self, method_idx):
        # two random components with no bridge
        rng = np.random.default_rng(60 + method_idx)
        left = [f"l{i}" for i in range(6)]
        right = [f"r{i}" for i in range(6)]
        edges = {}
        for group in (left, right):
            for i in range(len(group)):
                for j in range(i + 1, len(group)):
                    if rng.random() < 0.6:
                        edges[(group[i], group[j])] = 1.0
        # ensure both components are connected via a spanning path
        for group in (left, right):
            for a, b in zip(group, group[1:]):
                edges[(min(a, b), max(a, b))] = edges.get((min(a, b), max(a, b)), 1.0)
        g = WeightedGraph(left + right, edges)
        p = self.METHODS[method_idx](g)
        for members in p.clusters().values():
            assert members <= set(left) or members <= set(right)

    @pytest.mark.parametrize("kind", ClustererSpec.KINDS)
    def test_dispatch_deterministic_and_canonical(self, kind):
        spec = ClustererSpec(kind, seed=21)
        p1 = cluster(TWO_TRIANGLES, spec)
        p2 = cluster(TWO_TRIANGLES, spec)
        assert p1.assignment == p2.assignment
        assert p1.assignment == p1.canonical().assignment

    def test_spec_validation(self):
        with pytest.raises(ValueError):
            ClustererSpec("metis")
        with pytest.raises(ValueError):
            ClustererSpec("walktrap", walk_length=0)
