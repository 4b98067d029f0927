import itertools

import numpy as np
import pytest

from conftest import random_graph
from oracles import deception_moves_loop as brute_moves
from robustecd.adversarial import (
    AttackConfig,
    ExtractionConfig,
    apply_swaps,
    deception_moves,
    dm_deception,
    ego_network,
    extract_missing_data_subgraph,
    q_attack,
    sample_seeds,
)
from robustecd.errors import ConfigError
from robustecd.ga import GAConfig
from robustecd.graph import Graph, Partition
from robustecd.metrics import modularity

TINY_GA = GAConfig(population_size=10, generations=5)


class TestQAttack:
    def test_config(self):
        assert AttackConfig(method="q").method == "q_attack"
        with pytest.raises(ConfigError):
            AttackConfig(method="dm")
        with pytest.raises(ConfigError):
            AttackConfig(budget=-1)

    def test_zero_budget(self, karate):
        g, _ = karate
        assert q_attack(g, AttackConfig(budget=0), 0) is g

    def test_swaps_preserve_degrees(self, karate):
        g, _ = karate
        e = g.edges
        h, done = apply_swaps(g, [(int(e[0, 0]), int(e[0, 1]), int(e[-1, 0]), int(e[-1, 1]))])
        assert np.array_equal(h.degrees, g.degrees) and h.m == g.m

    @pytest.mark.filterwarnings("ignore:only . of . swaps")
    def test_degree_sequence_20_runs(self, karate):
        g, truth = karate
        q_truth = []
        for seed in range(20):
            h = q_attack(g, AttackConfig(budget=5, ga=TINY_GA), seed)
            assert h.m == g.m
            assert np.array_equal(h.degrees, g.degrees)
            assert not h.same_edges(g)
            q_truth.append(modularity(h, truth))
        assert np.mean(q_truth) < modularity(g, truth)

    def test_no_swap_possible(self):
        star = Graph.from_edges(4, [(0, 1), (0, 2), (0, 3)])
        with pytest.warns(UserWarning, match="no degree-preserving swap"):
            assert q_attack(star, AttackConfig(budget=2, ga=TINY_GA), 0) is star


class TestDeception:
    def test_config(self, karate):
        g, truth = karate
        with pytest.raises(ConfigError):
            dm_deception(g, truth, AttackConfig(method="dm", budget=1, target_community=7))

    def test_zero_budget(self, karate):
        g, truth = karate
        out = dm_deception(g, truth, AttackConfig(method="dm", budget=0, target_community=0))
        assert out.same_edges(g)

    def test_closed_form_matches_brute_force(self, karate):
        g, truth = karate
        lab = truth.labels.tolist()
        kind, u, v, dq = deception_moves(g, truth.labels, 1)
        ref = brute_moves(g, lab, 1)
        assert len(ref) == dq.shape[0]
        for k, a, b, d in zip(kind.tolist(), u.tolist(), v.tolist(), dq.tolist()):
            assert d == pytest.approx(ref[(k, (min(a, b), max(a, b)))], abs=1e-12)

    def test_isolated_triangle_steps(self):
        tri = Graph.from_edges(3, [(0, 1), (1, 2), (0, 2)])
        trace = []
        with pytest.warns(UserWarning, match="exhausted after 2"):
            out = dm_deception(tri, Partition([0, 0, 0]), AttackConfig(method="dm", budget=3, target_community=0), 0, trace)
        assert [t[0] for t in trace] == [0, 0] and out.m == 1

    @pytest.mark.parametrize("seed", range(8))
    def test_greedy_steps_match_brute_force(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(8, 31))
        g, _ = random_graph(rng, n, 0.2)
        if g.m < 3:
            return
        truth = Partition(rng.integers(0, 3, size=n))
        target = int(truth.labels[0])
        trace = []
        cur = g
        out = dm_deception(g, truth, AttackConfig(method="dm", budget=4, target_community=target), seed, trace)
        lab = truth.labels.tolist()
        adds = dels = 0
        for kind, a, b, d in trace:
            ref = brute_moves(cur, lab, target)
            best = min(ref.values())
            assert d <= 0 and d == pytest.approx(best, abs=1e-12)
            assert ref[(kind, (min(a, b), max(a, b)))] == pytest.approx(best, abs=1e-12)
            if kind == 0:
                cur = Graph.from_codes(n, cur.edge_codes[cur.edge_codes != min(a, b) * n + max(a, b)])
                dels += 1
            else:
                cur = Graph.from_codes(n, np.append(cur.edge_codes, min(a, b) * n + max(a, b)))
                adds += 1
        assert out.same_edges(cur)
        assert out.m == g.m + adds - dels

    def test_targets_hide_community(self, karate):
        g, truth = karate
        out = dm_deception(g, truth, AttackConfig(method="dm", budget=10, target_community=0), 1)
        assert modularity(out, truth) < modularity(g, truth)


class TestExtraction:
    def test_config(self, karate):
        g, truth = karate
        with pytest.raises(ConfigError):
            ExtractionConfig(x=0)
        with pytest.raises(ConfigError):
            extract_missing_data_subgraph(g, truth, ExtractionConfig(x=35, h=1))

    def test_whole_component(self, karate):
        g, truth = karate
        sub, part = extract_missing_data_subgraph(g, truth, ExtractionConfig(x=1, h=10), 0)
        assert sub.same_edges(g) and part == truth

    def test_all_seeds(self, karate):
        g, truth = karate
        sub, _ = extract_missing_data_subgraph(g, truth, ExtractionConfig(x=34, h=1), 0)
        assert sub.n == 34 and sub.m == 78

    def test_induced(self, karate):
        g, truth = karate
        sub, part = extract_missing_data_subgraph(g, truth, ExtractionConfig(x=2, h=1), 3)
        idx = [g.id_map[lab] for lab in sub.labels]
        for a, b in itertools.combinations(range(sub.n), 2):
            assert sub.has_edge(a, b) == g.has_edge(idx[a], idx[b])
        assert part == Partition(truth.labels[idx])

    def test_multi_label_vertices_dropped(self):
        g = Graph.from_edges(4, [(0, 1), (1, 2), (2, 3)])
        sub, part = extract_missing_data_subgraph(g, [("a",), ("a", "b"), ("b",), ("b",)], ExtractionConfig(x=4, h=1), 0)
        assert sub.labels == ("0", "2", "3") and part.labels.tolist() == [0, 1, 1]

    def test_degree_weighted_star_center(self):
        star = Graph.from_edges(5, [(0, 1), (0, 2), (0, 3), (0, 4)])
        rng = np.random.default_rng(0)
        draws = 100_000
        hits = sum(int(sample_seeds(star, 1, rng)[0] == 0) for _ in range(draws))
        p = 4 / 8
        assert abs(hits / draws - p) < 3 * np.sqrt(p * (1 - p) / draws)

    def test_ego(self):
        path = Graph.from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4)])
        assert ego_network(path, 2, 1) == {1, 2, 3}
