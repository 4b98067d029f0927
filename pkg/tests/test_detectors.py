import itertools
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import graphs, random_graph, two_cliques
from robustecd import _kernels
from robustecd.detectors import DetectorSpec, as_spec, detect, load_external_partition, walktrap
from robustecd.errors import PlugError
from robustecd.graph import Graph, Partition, format_partition
from robustecd.metrics import modularity, nmi

BUILTIN = ("louvain", "label_propagation", "greedy_modularity", "walktrap")


def assert_valid(p, g):
    assert isinstance(p, Partition)
    assert p.n == g.n
    assert sorted(set(p.labels.tolist())) == list(range(p.k))


def two_triangles():
    return Graph.from_edges(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)])


class TestSpec:
    def test_aliases_and_names(self):
        assert DetectorSpec("LOU").kind == "louvain"
        assert DetectorSpec("cnm").name == "FG"
        assert as_spec("wt").name == "WT"
        assert DetectorSpec("lpa").stochastic and not DetectorSpec("fg").stochastic

    def test_invalid(self):
        with pytest.raises(ValueError):
            DetectorSpec("infomap")
        with pytest.raises(ValueError):
            DetectorSpec("walktrap", walk_length=0)
        with pytest.raises(PlugError):
            DetectorSpec("external")


@pytest.mark.parametrize("kind", BUILTIN)
def test_valid_and_deterministic_on_karate(kind, karate):
    g, _ = karate
    a, b = detect(kind, g, 11), detect(kind, g, 11)
    assert_valid(a, g)
    assert a == b


@given(graphs(max_n=20), st.sampled_from(BUILTIN), st.integers(0, 2**31))
def test_valid_on_random_graphs(gd, kind, seed):
    g, _ = gd
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        p = detect(kind, g, seed)
    assert_valid(p, g)
    comp = _kernels.components(g.n, g.indptr, g.indices)
    # no community spans two components
    for block in p.blocks():
        assert len(set(comp[block].tolist())) == 1


def test_louvain_karate_counts(karate):
    g, truth = karate
    parts = [detect("louvain", g, s) for s in range(30)]
    assert all(p.k == 4 for p in parts)
    qs = [modularity(g, p) for p in parts]
    hits = [p for p, q in zip(parts, qs) if abs(q - 0.4188) < 1e-4]
    assert hits
    assert nmi(hits[0], truth) == pytest.approx(0.587, abs=1e-3)


def test_louvain_level_history_monotone(karate):
    g, _ = karate
    for seed in range(20):
        _, hist = _kernels.louvain(g.n, g.indptr, g.indices, seed)
        assert np.all(np.diff(hist) >= -1e-12)


def test_greedy_modularity_karate(karate):
    g, _ = karate
    p = detect("greedy_modularity", g)
    assert p.k == 3
    assert modularity(g, p) == pytest.approx(0.3807, abs=1e-4)
    _, hist = _kernels.greedy_modularity(g.n, g.indptr, g.indices)
    assert modularity(g, p) == pytest.approx(hist.max(), abs=1e-12)


def test_label_propagation_two_triangles():
    g = two_triangles()
    for seed in range(20):
        assert detect("lp", g, seed).labels.tolist() == [0, 0, 0, 1, 1, 1]


@pytest.mark.parametrize("seed", range(10))
def test_label_propagation_fixed_point(seed, karate):
    g, _ = karate
    lab, _, converged = _kernels.label_propagation(g.n, g.indptr, g.indices, seed)
    assert converged
    for v in range(g.n):
        counts = np.bincount(lab[g.neighbors(v)])
        assert counts[lab[v]] == counts.max()


def test_label_propagation_cap_warns():
    g = Graph.from_edges(2, [(0, 1)])
    import robustecd.detectors as det

    old = det.LP_MAX_SWEEPS
    det.LP_MAX_SWEEPS = 0
    try:
        with pytest.warns(UserWarning, match="cap"):
            detect("lp", g, 0)
    finally:
        det.LP_MAX_SWEEPS = old


def test_walktrap_recovers_planted_cliques():
    g = two_cliques(6)
    assert walktrap(g.n, g.indptr, g.indices).tolist() == [0] * 6 + [1] * 6
    ring = [(i, j) for c in range(4) for i, j in itertools.combinations(range(5 * c, 5 * c + 5), 2)]
    ring += [(4, 5), (9, 10), (14, 15), (19, 0)]
    g = Graph.from_edges(20, ring)
    assert detect("walktrap", g).labels.tolist() == [c for c in range(4) for _ in range(5)]


def test_disconnected_labels_are_distinct():
    g = Graph.from_edges(8, [(0, 1), (1, 2), (0, 2), (4, 5), (5, 6), (4, 6)])
    for kind in BUILTIN:
        p = detect(kind, g, 0)
        assert p.k == 4
        assert p.labels[3] != p.labels[7]


class TestExternal:
    def test_truth_file(self, karate_paths, karate):
        g, _ = karate
        assert detect(DetectorSpec("external", path=karate_paths[1]), g).k == 2

    def test_coverage_gap(self, tmp_path, karate):
        g, truth = karate
        text = format_partition(truth, g).splitlines()
        f = tmp_path / "short.labels"
        f.write_text("\n".join(text[:-1]) + "\n")
        with pytest.raises(PlugError, match=repr(g.labels[-1])):
            load_external_partition(f, g)

    def test_missing_file(self, tmp_path, karate):
        g, _ = karate
        with pytest.raises(PlugError):
            load_external_partition(tmp_path / "nope", g)

    def test_permuted_labels(self, tmp_path, karate):
        g, truth = karate
        f = tmp_path / "perm.labels"
        f.write_text("".join(f"{v} c{1 - c}\n" for v, c in zip(g.labels, truth.labels.tolist())))
        assert nmi(load_external_partition(f, g), truth) == 1.0


class TestBackends:
    """The compiled and pure-Python kernels must agree bit for bit."""

    @pytest.fixture(autouse=True)
    def _backends(self):
        try:
            self.cy = _kernels.get_backend("cython")
        except ImportError:
            pytest.skip("compiled kernels not built")
        self.py = _kernels.get_backend("python")

    @given(graphs(max_n=25), st.integers(0, 2**63 - 1))
    def test_louvain(self, gd, seed):
        g, _ = gd
        a = self.cy.louvain(g.n, g.indptr, g.indices, seed)
        b = self.py.louvain(g.n, g.indptr, g.indices, seed)
        assert np.array_equal(a[0], b[0])
        assert np.allclose(a[1], b[1], atol=1e-12)

    @given(graphs(max_n=25), st.integers(0, 2**63 - 1))
    def test_label_propagation(self, gd, seed):
        g, _ = gd
        a = self.cy.label_propagation(g.n, g.indptr, g.indices, seed, 100)
        b = self.py.label_propagation(g.n, g.indptr, g.indices, seed, 100)
        assert np.array_equal(a[0], b[0]) and a[1:] == b[1:]

    @given(graphs(max_n=25))
    def test_greedy_modularity(self, gd):
        g, _ = gd
        a = self.cy.greedy_modularity(g.n, g.indptr, g.indices)
        b = self.py.greedy_modularity(g.n, g.indptr, g.indices)
        assert np.array_equal(a[0], b[0])
        assert np.allclose(a[1], b[1], atol=1e-12)

    @given(graphs(max_n=25))
    def test_components(self, gd):
        g, _ = gd
        assert np.array_equal(self.cy.components(g.n, g.indptr, g.indices), self.py.components(g.n, g.indptr, g.indices))

    def test_karate_many_seeds(self, karate):
        g, _ = karate
        for seed in range(25):
            assert np.array_equal(self.cy.louvain(g.n, g.indptr, g.indices, seed)[0],
                                  self.py.louvain(g.n, g.indptr, g.indices, seed)[0])

    def test_read_only_inputs(self, karate):
        g, _ = karate
        assert not g.indptr.flags.writeable
        self.cy.louvain(g.n, g.indptr, g.indices, 0)
        self.cy.components(g.n, g.indptr, g.indices)
