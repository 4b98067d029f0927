import itertools
import sys
from importlib.resources import files
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).parent))

from robustecd.graph import Graph, read_edge_list, read_labels  # noqa: E402

settings.register_profile(
    "default", deadline=None, suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large]
)
settings.load_profile("default")

DATA = files("robustecd") / "data"


@pytest.fixture(scope="session")
def karate():
    g = read_edge_list(DATA / "karate.edges")
    return g, read_labels(DATA / "karate.labels", g)


@pytest.fixture(scope="session")
def karate_paths():
    return str(DATA / "karate.edges"), str(DATA / "karate.labels")


def random_graph(rng, n, p):
    edges = [(i, j) for i, j in itertools.combinations(range(n), 2) if rng.random() < p]
    return Graph.from_edges(n, edges), edges


def two_cliques(k, bridge=True):
    edges = list(itertools.combinations(range(k), 2))
    edges += [(a + k, b + k) for a, b in itertools.combinations(range(k), 2)]
    if bridge:
        edges.append((k - 1, k))
    return Graph.from_edges(2 * k, edges)


@st.composite
def graphs(draw, min_n=1, max_n=20, min_m=0):
    n = draw(st.integers(min_n, max_n))
    pairs = list(itertools.combinations(range(n), 2))
    mask = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    edges = [pr for pr, keep in zip(pairs, mask) if keep]
    if len(edges) < min_m:
        edges = pairs[: max(min_m, len(edges))]
    return Graph.from_edges(n, edges), edges


@st.composite
def graph_partitions(draw, min_n=1, max_n=20, min_m=0):
    g, edges = draw(graphs(min_n, max_n, min_m))
    k = draw(st.integers(1, max(1, g.n)))
    labels = draw(st.lists(st.integers(0, k - 1), min_size=g.n, max_size=g.n))
    return g, edges, labels


def labelings(n, max_k=None):
    return st.lists(st.integers(0, (max_k or n) - 1), min_size=n, max_size=n)


# acceptance lines, echoed in the terminal summary
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
