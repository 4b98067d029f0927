"""Immutable undirected graphs, partitions, and the rewiring primitive.

Vertex pairs are handled in two forms. The public form is a tuple ``(i, j)``
with ``i < j``. Internally a pair is packed into a single integer code
``i * n + j`` so that edge sets become sorted ``int64`` arrays and set algebra
reduces to ``searchsorted``/``isin``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.sparse import csr_matrix

from . import _kernels

from .errors import (
    CapacityError,
    CoverageError,
    EmptyGraphError,
    LabelConflictError,
    ModificationError,
    ParseError,
)

Pair = tuple[int, int]

# above this many vertex pairs the non-edge universe is sampled by rejection
_DENSE_PAIR_LIMIT = 2_000_000


def budget(m: int, beta: float) -> int:
    """Number of modifications allowed by a budget: ``ceil(m * beta)``."""
    # the epsilon absorbs binary round-off such as 100 * 0.07 = 7.000000000000001
    return max(0, math.ceil(m * beta - 1e-9))


def _frozen(a, dtype=np.int64):
    a = np.ascontiguousarray(a, dtype=dtype)
    a.setflags(write=False)
    return a


class Graph:
    """Undirected simple graph over vertices ``0..n-1``.

    Stored as a symmetric CSR adjacency with sorted neighbor lists. External
    vertex labels are kept in ``labels`` (index -> label). Instances are
    immutable; every rewiring produces a new graph.
    """

    def __init__(self, n, indptr, indices, labels=None):
        self.n = int(n)
        self.indptr = _frozen(indptr)
        self.indices = _frozen(indices)
        if labels is None:
            labels = tuple(str(i) for i in range(self.n))
        self.labels = tuple(labels)
        if len(self.labels) != self.n:
            raise ValueError("labels must have one entry per vertex")

    # -- construction ----------------------------------------------------

    @classmethod
    def from_codes(cls, n, codes, labels=None) -> "Graph":
        """Build from packed pair codes (``i * n + j`` with ``i < j``)."""
        codes = np.unique(np.asarray(codes, dtype=np.int64))
        u = codes // n
        v = codes % n
        src = np.concatenate([u, v])
        dst = np.concatenate([v, u])
        order = np.lexsort((dst, src))
        src = src[order]
        dst = dst[order]
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=n), out=indptr[1:])
        g = cls(n, indptr, dst, labels)
        g.__dict__["edge_codes"] = _frozen(codes)
        return g

    @classmethod
    def from_edges(cls, n, edges: Iterable[Pair], labels=None) -> "Graph":
        """Build from vertex-index pairs; self-loops and duplicates are dropped."""
        arr = np.asarray(list(edges), dtype=np.int64).reshape(-1, 2)
        if arr.size and (arr.min() < 0 or arr.max() >= n):
            raise ValueError("edge endpoint out of range")
        arr = arr[arr[:, 0] != arr[:, 1]]
        lo = np.minimum(arr[:, 0], arr[:, 1])
        hi = np.maximum(arr[:, 0], arr[:, 1])
        return cls.from_codes(n, lo * n + hi, labels)

    # -- derived views ---------------------------------------------------

    @cached_property
    def degrees(self) -> np.ndarray:
        return _frozen(np.diff(self.indptr))

    @cached_property
    def m(self) -> int:
        return int(self.indices.shape[0] // 2)

    @cached_property
    def edge_codes(self) -> np.ndarray:
        src = np.repeat(np.arange(self.n, dtype=np.int64), self.degrees)
        keep = src < self.indices
        return _frozen(np.sort(src[keep] * self.n + self.indices[keep]))

    @property
    def edges(self) -> np.ndarray:
        """``(m, 2)`` array of edges ``(i, j)``, ``i < j``, sorted."""
        c = self.edge_codes
        return np.stack([c // self.n, c % self.n], axis=1)

    @cached_property
    def adjacency(self) -> tuple[frozenset, ...]:
        ip, ix = self.indptr, self.indices
        return tuple(frozenset(ix[ip[i]:ip[i + 1]].tolist()) for i in range(self.n))

    @cached_property
    def id_map(self) -> dict[str, int]:
        return {lab: i for i, lab in enumerate(self.labels)}

    @property
    def num_pairs(self) -> int:
        return self.n * (self.n - 1) // 2

    @property
    def num_nonedges(self) -> int:
        return self.num_pairs - self.m

    def neighbors(self, i) -> np.ndarray:
        return self.indices[self.indptr[i]:self.indptr[i + 1]]

    def has_edge(self, i, j) -> bool:
        nb = self.neighbors(i)
        pos = np.searchsorted(nb, j)
        return bool(pos < nb.shape[0] and nb[pos] == j)

    def encode(self, pairs) -> np.ndarray:
        """Pack pairs into codes, orienting each pair as ``(min, max)``."""
        arr = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
        lo = np.minimum(arr[:, 0], arr[:, 1])
        hi = np.maximum(arr[:, 0], arr[:, 1])
        return lo * self.n + hi

    def decode(self, codes) -> list[Pair]:
        codes = np.asarray(codes, dtype=np.int64)
        return list(zip((codes // self.n).tolist(), (codes % self.n).tolist()))

    def contains_codes(self, codes) -> np.ndarray:
        """Boolean mask: which codes are edges of this graph."""
        ec = self.edge_codes
        codes = np.asarray(codes, dtype=np.int64)
        if ec.shape[0] == 0:
            return np.zeros(codes.shape, dtype=bool)
        pos = np.searchsorted(ec, codes)
        pos[pos == ec.shape[0]] = 0
        return ec[pos] == codes

    def to_sparse(self, dtype=np.float64) -> csr_matrix:
        data = np.ones(self.indices.shape[0], dtype=dtype)
        return csr_matrix((data, self.indices, self.indptr), shape=(self.n, self.n))

    def subgraph(self, vertices) -> "Graph":
        """Induced subgraph on ``vertices`` (kept in the given order)."""
        vertices = np.asarray(vertices, dtype=np.int64)
        local = np.full(self.n, -1, dtype=np.int64)
        local[vertices] = np.arange(vertices.shape[0])
        e = self.edges
        keep = (local[e[:, 0]] >= 0) & (local[e[:, 1]] >= 0)
        sub = local[e[keep]]
        labels = [self.labels[v] for v in vertices.tolist()]
        return Graph.from_edges(vertices.shape[0], map(tuple, sub.tolist()), labels)

    def with_labels(self, labels) -> "Graph":
        return Graph(self.n, self.indptr, self.indices, labels)

    def same_edges(self, other: "Graph") -> bool:
        return self.n == other.n and np.array_equal(self.edge_codes, other.edge_codes)

    def __repr__(self):
        return f"Graph(n={self.n}, m={self.m})"


class Partition:
    """Disjoint cover of vertices ``0..n-1`` by labels normalized to ``0..k-1``.

    Labels are renumbered by first appearance over vertex order, so two
    partitions are equal up to relabeling exactly when their arrays are equal.
    """

    def __init__(self, labels):
        arr = np.asarray(labels)
        if arr.ndim != 1:
            raise ValueError("partition labels must be one-dimensional")
        if arr.size:
            _, first, inv = np.unique(arr, return_index=True, return_inverse=True)
            rank = np.empty(first.shape[0], dtype=np.int64)
            rank[np.argsort(first, kind="stable")] = np.arange(first.shape[0])
            norm = rank[inv.reshape(-1)]
        else:
            norm = np.zeros(0, dtype=np.int64)
        self.labels = _frozen(norm)

    @classmethod
    def trusted(cls, labels) -> "Partition":
        """Wrap labels already numbered by first appearance (no checks)."""
        p = cls.__new__(cls)
        p.labels = _frozen(labels)
        return p

    @property
    def n(self) -> int:
        return int(self.labels.shape[0])

    @cached_property
    def k(self) -> int:
        return int(self.labels.max()) + 1 if self.n else 0

    @cached_property
    def sizes(self) -> np.ndarray:
        return _frozen(np.bincount(self.labels, minlength=self.k))

    def blocks(self) -> list[np.ndarray]:
        order = np.argsort(self.labels, kind="stable")
        return np.split(order, np.cumsum(self.sizes)[:-1])

    def __len__(self):
        return self.n

    def __eq__(self, other):
        if not isinstance(other, Partition):
            return NotImplemented
        return np.array_equal(self.labels, other.labels)

    def __hash__(self):
        return hash(self.labels.tobytes())

    def __repr__(self):
        return f"Partition(n={self.n}, k={self.k})"


@dataclass(frozen=True)
class ModificationScheme:
    """Edges to add (non-edges of the target) and edges to remove."""

    add: tuple[Pair, ...] = ()
    remove: tuple[Pair, ...] = ()

    @classmethod
    def from_codes(cls, n, add_codes, remove_codes) -> "ModificationScheme":
        def dec(c):
            c = np.asarray(c, dtype=np.int64)
            return tuple(zip((c // n).tolist(), (c % n).tolist()))

        return cls(dec(add_codes), dec(remove_codes))

    def inverse(self) -> "ModificationScheme":
        return ModificationScheme(self.remove, self.add)

    def __len__(self):
        return len(self.add) + len(self.remove)


# -- text formats --------------------------------------------------------


def _records(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        yield lineno, line.split()


def load_edge_list(text: str) -> Graph:
    """Parse a whitespace-separated edge list.

    Self-loops are dropped (their vertices are kept), duplicate edges are
    collapsed, and labels are indexed in order of first appearance.
    """
    ids: dict[str, int] = {}
    edges = []
    for lineno, tok in _records(text):
        if len(tok) != 2:
            raise ParseError(f"expected 2 vertex labels, found {len(tok)}", lineno)
        a, b = tok
        ia = ids.setdefault(a, len(ids))
        ib = ids.setdefault(b, len(ids))
        if ia != ib:
            edges.append((ia, ib))
    if not ids:
        raise EmptyGraphError("edge list contains no vertices")
    return Graph.from_edges(len(ids), edges, labels=list(ids))


def read_edge_list(path) -> Graph:
    return load_edge_list(Path(path).read_text(encoding="utf-8"))


def format_edge_list(g: Graph) -> str:
    """Serialize so that re-parsing reproduces the same vertex indexing.

    Edges are grouped by their larger endpoint and, within a group, written
    in decreasing order of the smaller one. A vertex that would otherwise
    first appear out of order is introduced by a self-loop line, which the
    parser drops.
    """
    lab = g.labels
    lines = []
    seen = np.zeros(g.n, dtype=bool)
    for w in range(g.n):
        nb = g.neighbors(w)
        lower = nb[nb < w][::-1]
        if not seen[w] and lower.shape[0] == 0:
            nxt_pair = w + 1 < g.n and g.has_edge(w, w + 1)
            if not nxt_pair:
                lines.append(f"{lab[w]} {lab[w]}")
                seen[w] = True
        for u in lower.tolist():
            lines.append(f"{lab[u]} {lab[w]}")
            seen[u] = True
            seen[w] = True
    return "\n".join(lines) + "\n"


def write_edge_list(g: Graph, path) -> None:
    Path(path).write_text(format_edge_list(g), encoding="utf-8")


def load_labels(text: str, graph: Graph | None = None) -> Partition:
    """Parse ``vertex community`` lines into a Partition.

    With ``graph`` the partition is indexed by the graph's vertex indices and
    must cover every vertex; otherwise vertices are indexed by first
    appearance in the file.
    """
    assign: dict[str, str] = {}
    for lineno, tok in _records(text):
        if len(tok) != 2:
            raise ParseError(f"expected 'vertex community', found {len(tok)} fields", lineno)
        v, c = tok
        prev = assign.get(v)
        if prev is not None and prev != c:
            raise LabelConflictError(f"line {lineno}: vertex {v!r} labeled both {prev!r} and {c!r}")
        assign[v] = c
    if graph is None:
        return Partition(list(assign.values())) if assign else Partition([])
    unknown = [v for v in assign if v not in graph.id_map]
    if unknown:
        raise CoverageError(f"vertex {unknown[0]!r} is not in the graph")
    missing = [v for v in graph.labels if v not in assign]
    if missing:
        raise CoverageError(f"vertex {missing[0]!r} has no community label")
    return Partition([assign[v] for v in graph.labels])


def read_labels(path, graph: Graph | None = None) -> Partition:
    return load_labels(Path(path).read_text(encoding="utf-8"), graph)


def format_partition(p: Partition, graph: Graph | None = None) -> str:
    names = graph.labels if graph is not None else [str(i) for i in range(p.n)]
    if len(names) != p.n:
        raise CoverageError("partition and graph sizes differ")
    return "".join(f"{v} {c}\n" for v, c in zip(names, p.labels.tolist()))


def write_partition(p: Partition, path, graph: Graph | None = None) -> None:
    Path(path).write_text(format_partition(p, graph), encoding="utf-8")


# -- rewiring --------------------------------------------------------------


def _check_pairs(g: Graph, pairs, what) -> np.ndarray:
    arr = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    for i, j in arr.tolist():
        if i == j or not (0 <= i < g.n and 0 <= j < g.n):
            raise ModificationError(f"{what} pair {(i, j)} is not a vertex pair of the graph")
    codes = g.encode(arr)
    uniq, counts = np.unique(codes, return_counts=True)
    if uniq.shape[0] != codes.shape[0]:
        dup = g.decode(uniq[counts > 1][:1])[0]
        raise ModificationError(f"{what} pair {dup} is repeated")
    return codes


def apply_modification(g: Graph, mod: ModificationScheme) -> Graph:
    """Return ``E ∪ add \\ remove`` as a new graph over the same vertices."""
    add = _check_pairs(g, mod.add, "added")
    rem = _check_pairs(g, mod.remove, "removed")
    present = g.contains_codes(add)
    if present.any():
        raise ModificationError(f"added pair {g.decode(add[present][:1])[0]} is already an edge")
    absent = ~g.contains_codes(rem)
    if absent.any():
        raise ModificationError(f"removed pair {g.decode(rem[absent][:1])[0]} is not an edge")
    return rewire_codes(g, add, rem)


def rewire_codes(g: Graph, add_codes, remove_codes) -> Graph:
    """Unchecked rewiring on packed codes; callers guarantee validity."""
    ec = g.edge_codes
    if len(remove_codes):
        ec = ec[~np.isin(ec, remove_codes, assume_unique=True)]
    if len(add_codes):
        ec = np.concatenate([ec, np.asarray(add_codes, dtype=np.int64)])
    return Graph.from_codes(g.n, ec, g.labels)


# -- sampling --------------------------------------------------------------


def _weighted_keys(weights: np.ndarray, rng) -> np.ndarray:
    # exponential keys: log(U) / w, largest key first
    u = rng.random(weights.shape[0])
    with np.errstate(divide="ignore"):
        return np.log(u) / weights


def weighted_sample_without_replacement(weights, count, rng) -> np.ndarray:
    """Indices of ``count`` items drawn without replacement, P ∝ weight.

    Only positive-weight items are eligible; the result is in draw order.
    """
    weights = np.asarray(weights, dtype=np.float64)
    pos = np.flatnonzero(weights > 0)
    count = min(count, pos.shape[0])
    if count == 0:
        return np.zeros(0, dtype=np.int64)
    keys = _weighted_keys(weights[pos], rng)
    if count < pos.shape[0]:
        top = np.argpartition(-keys, count - 1)[:count]
    else:
        top = np.arange(pos.shape[0])
    top = top[np.argsort(-keys[top], kind="stable")]
    return pos[top]


def _all_nonedge_codes(g: Graph) -> np.ndarray:
    iu, ju = np.triu_indices(g.n, k=1)
    codes = iu.astype(np.int64) * g.n + ju
    return codes[~g.contains_codes(codes)]


def _uniform_nonedges(g: Graph, count, exclude, rng) -> np.ndarray:
    """``count`` distinct uniform non-edge codes not in ``exclude``."""
    if count <= 0:
        return np.zeros(0, dtype=np.int64)
    exclude = np.asarray(exclude, dtype=np.int64)
    free = g.num_nonedges - exclude.shape[0]
    if count > free:
        raise CapacityError(f"requested {count} non-edges but only {free} are available")
    if g.num_pairs <= _DENSE_PAIR_LIMIT or free < 4 * count:
        pool = _all_nonedge_codes(g)
        if exclude.shape[0]:
            pool = pool[~np.isin(pool, exclude)]
        return pool[rng.choice(pool.shape[0], size=count, replace=False)]
    chosen: list[int] = []
    taken = set(exclude.tolist())
    while len(chosen) < count:
        batch = 2 * (count - len(chosen)) + 16
        a = rng.integers(0, g.n, size=batch)
        b = rng.integers(0, g.n, size=batch)
        ok = a != b
        codes = np.minimum(a, b)[ok] * g.n + np.maximum(a, b)[ok]
        codes = codes[~g.contains_codes(codes)]
        for c in codes.tolist():
            if c not in taken:
                taken.add(c)
                chosen.append(c)
                if len(chosen) == count:
                    break
    return np.asarray(chosen, dtype=np.int64)


def sample_nonedge_codes(g: Graph, count, cand_codes=None, cand_weights=None, rng=None) -> np.ndarray:
    """Code-level form of :func:`sample_nonedges`."""
    rng = np.random.default_rng(rng)
    if count > g.num_nonedges:
        raise CapacityError(f"requested {count} non-edges but the graph has {g.num_nonedges}")
    if cand_codes is None:
        return _uniform_nonedges(g, count, (), rng)
    cand_codes = np.asarray(cand_codes, dtype=np.int64)
    cand_weights = np.asarray(cand_weights, dtype=np.float64)
    if np.any(cand_weights < 0):
        raise ValueError("sampling weights must be nonnegative")
    mask = ~g.contains_codes(cand_codes)
    cand_codes, cand_weights = cand_codes[mask], cand_weights[mask]
    picked = cand_codes[weighted_sample_without_replacement(cand_weights, count, rng)]
    short = count - picked.shape[0]
    if short > 0:
        warnings.warn(
            f"only {picked.shape[0]} positively weighted candidates; "
            f"filling {short} uniformly from remaining non-edges",
            stacklevel=3,
        )
        picked = np.concatenate([picked, _uniform_nonedges(g, short, picked, rng)])
    return picked


def sample_nonedges(g: Graph, count: int, weights=None, rng=None) -> list[Pair]:
    """Draw ``count`` distinct non-edges without replacement.

    ``weights`` maps pairs to nonnegative scores; inclusion is then
    proportional to score (exponential-key ranking). Pairs that are already
    edges are ignored. Without weights the draw is uniform over all
    non-edges.
    """
    if weights is None:
        return g.decode(sample_nonedge_codes(g, count, rng=rng))
    if isinstance(weights, Mapping):
        pairs = list(weights.keys())
        w = np.fromiter(weights.values(), dtype=np.float64, count=len(pairs))
    else:
        pairs, w = weights
    codes = g.encode(pairs) if len(pairs) else np.zeros(0, dtype=np.int64)
    return g.decode(sample_nonedge_codes(g, count, codes, w, rng))


# -- structure -------------------------------------------------------------


def component_labels(n, indptr, indices) -> np.ndarray:
    """Component id per vertex, numbered by smallest contained vertex."""
    return _kernels.components(n, indptr, indices)


def connected_components(g: Graph) -> Partition:
    return Partition.trusted(component_labels(g.n, g.indptr, g.indices))


def relabel_sequence(seq: Sequence) -> np.ndarray:
    return Partition(seq).labels
