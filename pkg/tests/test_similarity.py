import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import graphs, random_graph
from oracles import neighbor_sets, similarity_dense
from robustecd.errors import ConvergenceError
from robustecd.graph import Graph
from robustecd.similarity import KINDS, compute_all, compute_similarity, normalize_kind, rwr_distribution

PATH3 = Graph.from_edges(3, [(0, 1), (1, 2)])
LOCAL = ("cn", "salton", "jaccard", "hpi", "aa", "ra")


def test_path_values():
    assert compute_similarity(PATH3, "cn").score(0, 2) == 1
    assert compute_similarity(PATH3, "jaccard").score(0, 2) == 1
    assert compute_similarity(PATH3, "ra").score(0, 2) == 0.5
    assert compute_similarity(PATH3, "cn").score(0, 1) == 0


def test_aliases():
    assert normalize_kind("CN") == "cn"
    with pytest.raises(ValueError):
        normalize_kind("katz")


@pytest.mark.parametrize("seed", range(5))
def test_lp_alpha_zero_is_cn(seed):
    g, _ = random_graph(np.random.default_rng(seed), 25, 0.2)
    lp = compute_similarity(g, "lp", alpha=0.0).to_dense()
    cn = compute_similarity(g, "cn").to_dense()
    assert np.array_equal(lp, cn)


@pytest.mark.parametrize("kind", KINDS)
def test_dense_oracle_50_graphs(kind):
    rng = np.random.default_rng(2024)
    for _ in range(50):
        n = int(rng.integers(2, 51))
        g, edges = random_graph(rng, n, rng.uniform(0.02, 0.4))
        got = compute_similarity(g, kind).to_dense()
        ref = similarity_dense(n, edges, kind)
        assert np.max(np.abs(got - ref)) < 1e-9


@given(graphs(max_n=20), st.sampled_from(KINDS))
def test_symmetric_nonnegative_zero_diagonal(gd, kind):
    g, _ = gd
    h = compute_similarity(g, kind).to_dense()
    assert np.allclose(h, h.T, atol=1e-15)
    assert (h >= 0).all()
    assert not np.diag(h).any()


@given(graphs(max_n=20))
def test_local_support_and_ranges(gd):
    g, edges = gd
    nb = neighbor_sets(g.n, edges)
    mats = {kd: compute_similarity(g, kd).to_dense() for kd in LOCAL}
    for i in range(g.n):
        for j in range(g.n):
            share = bool(nb[i] & nb[j]) and i != j
            for kd in LOCAL:
                assert (mats[kd][i, j] > 0) == share
    for kd in ("hpi", "jaccard", "salton"):
        assert mats[kd].max(initial=0) <= 1 + 1e-12


@given(graphs(max_n=15))
def test_lp_support_within_three_hops(gd):
    g, _ = gd
    a = g.to_sparse().toarray()
    reach = (a + a @ a + a @ a @ a) > 0
    h = compute_similarity(g, "lp").to_dense()
    assert not ((h > 0) & ~reach).any()


@given(graphs(max_n=15), st.floats(0, 0.5), st.floats(0, 0.5))
def test_lp_monotone_in_alpha(gd, a1, a2):
    g, _ = gd
    lo, hi = sorted((a1, a2))
    assert (compute_similarity(g, "lp", alpha=lo).to_dense() <= compute_similarity(g, "lp", alpha=hi).to_dense() + 1e-12).all()


class TestRWR:
    def test_single_edge_hand_solution(self):
        g = Graph.from_edges(2, [(0, 1)])
        q = rwr_distribution(g, 0, c=0.5)
        assert q[0] == pytest.approx(2 / 3, abs=1e-9)
        assert q[1] == pytest.approx(1 / 3, abs=1e-9)

    def test_small_c_concentrates_on_source(self, karate):
        g, _ = karate
        q = rwr_distribution(g, 5, c=1e-6)
        assert q[5] == pytest.approx(1.0, abs=1e-5)

    def test_isolated_source_warns(self):
        g = Graph.from_edges(3, [(0, 1)])
        with pytest.warns(UserWarning, match="isolated"):
            q = rwr_distribution(g, 2)
        assert q.tolist() == [0, 0, 1]

    def test_bad_c(self, karate):
        g, _ = karate
        with pytest.raises(ValueError):
            compute_similarity(g, "rwr", c=1.0)

    def test_iteration_cap(self, karate):
        g, _ = karate
        with pytest.raises(ConvergenceError) as info:
            rwr_distribution(g, 0, c=0.99, max_iter=3)
        assert info.value.residual > 0

    @given(graphs(min_n=2, max_n=30, min_m=1), st.floats(0.05, 0.95), st.data())
    def test_probability_vector_and_fixed_point(self, gd, c, data):
        g, _ = gd
        src = data.draw(st.sampled_from(np.flatnonzero(g.degrees > 0).tolist()))
        q = rwr_distribution(g, src, c=c)
        assert abs(q.sum() - 1.0) < 1e-9
        assert (q >= 0).all()
        k = g.degrees.astype(float)
        p = g.to_sparse().toarray() / np.where(k > 0, k, 1)[:, None]
        e = np.zeros(g.n)
        e[src] = 1.0
        assert np.abs(c * p.T @ q + (1 - c) * e - q).sum() < 1e-9


def test_compute_all_and_csv(karate):
    g, _ = karate
    sims = compute_all(g)
    assert [s.kind for s in sims] == list(KINDS)
    text = sims[0].to_csv()
    assert text.startswith("i,j,score\n")
    codes, vals = sims[0].upper()
    assert len(text.splitlines()) == codes.shape[0] + 1
    assert (vals > 0).all()
