"""Community detectors behind a single dispatch.

Louvain, label propagation and greedy modularity (CNM) run in the compiled
kernels; Walktrap is agglomerative over dense walk vectors and lives here.
Every detector runs per connected component, with labels offset so they
stay globally distinct.
"""

from __future__ import annotations

import heapq
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _kernels
from .errors import CapExceededError, CoverageError, ParseError, PlugError
from .graph import Graph, Partition, component_labels, read_labels

KINDS = ("louvain", "label_propagation", "greedy_modularity", "walktrap", "external")

_ALIASES = {
    "louvain": "louvain", "lou": "louvain",
    "label_propagation": "label_propagation", "lp": "label_propagation", "lpa": "label_propagation",
    "greedy_modularity": "greedy_modularity", "fg": "greedy_modularity", "cnm": "greedy_modularity",
    "fastgreedy": "greedy_modularity",
    "walktrap": "walktrap", "wt": "walktrap",
    "external": "external",
}

SHORT_NAMES = {
    "louvain": "LOU", "label_propagation": "LP", "greedy_modularity": "FG",
    "walktrap": "WT", "external": "EXT",
}

# dense walk vectors cost n^2 floats
WALKTRAP_MAX_N = 20_000
LP_MAX_SWEEPS = 100


def normalize_kind(kind: str) -> str:
    try:
        return _ALIASES[kind.lower()]
    except KeyError:
        raise ValueError(f"unknown detector {kind!r}; expected one of {', '.join(KINDS)}") from None


@dataclass(frozen=True)
class DetectorSpec:
    kind: str = "louvain"
    walk_length: int = 4
    path: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", normalize_kind(self.kind))
        if self.walk_length < 1:
            raise ValueError("walktrap walk length must be >= 1")
        if self.kind == "external" and not self.path:
            raise PlugError("external detector needs a partition file path")

    @property
    def stochastic(self) -> bool:
        return self.kind in ("louvain", "label_propagation")

    @property
    def name(self) -> str:
        return SHORT_NAMES[self.kind]

    def __call__(self, g: Graph, rng=None) -> Partition:
        return detect(self, g, rng)


def as_spec(detector) -> DetectorSpec:
    if isinstance(detector, DetectorSpec):
        return detector
    return DetectorSpec(detector)


def _seed(rng) -> int:
    return int(rng.integers(0, 2**63 - 1, dtype=np.int64))


def _run_component(kind, n, indptr, indices, rng, walk_length):
    if kind == "louvain":
        try:
            lab, hist = _kernels.louvain(n, indptr, indices, _seed(rng))
        except RuntimeError as exc:
            raise CapExceededError(str(exc)) from exc
        if np.any(np.diff(hist) < -1e-12):
            raise AssertionError("louvain decreased modularity between levels")
        return lab
    if kind == "label_propagation":
        lab, _, converged = _kernels.label_propagation(n, indptr, indices, _seed(rng), LP_MAX_SWEEPS)
        if not converged:
            warnings.warn(f"label propagation stopped at the {LP_MAX_SWEEPS}-sweep cap", stacklevel=4)
        return lab
    if kind == "greedy_modularity":
        lab, _ = _kernels.greedy_modularity(n, indptr, indices)
        return lab
    if kind == "walktrap":
        return walktrap(n, indptr, indices, walk_length)
    raise ValueError(kind)


def detect(spec, g: Graph, rng=None) -> Partition:
    """Run a detector on ``g``; stochastic kinds draw their seeds from ``rng``."""
    spec = as_spec(spec)
    if g.n == 0:
        raise ValueError("cannot detect communities on an empty graph")
    if spec.kind == "external":
        return load_external_partition(spec.path, g)
    rng = np.random.default_rng(rng)
    comp = component_labels(g.n, g.indptr, g.indices)
    ncomp = int(comp.max()) + 1
    if ncomp == 1:
        return Partition.trusted(_run_component(spec.kind, g.n, g.indptr, g.indices, rng, spec.walk_length))
    out = np.empty(g.n, dtype=np.int64)
    offset = 0
    order = np.argsort(comp, kind="stable")
    bounds = np.cumsum(np.bincount(comp, minlength=ncomp))
    start = 0
    for stop in bounds.tolist():
        verts = order[start:stop]
        start = stop
        if verts.shape[0] == 1:
            out[verts] = offset
            offset += 1
            continue
        sub = g.subgraph(verts)
        lab = _run_component(spec.kind, sub.n, sub.indptr, sub.indices, rng, spec.walk_length)
        out[verts] = lab + offset
        offset += int(lab.max()) + 1
    return Partition(out)


def load_external_partition(path, g: Graph) -> Partition:
    """Bind a label file produced by an out-of-process detector to ``g``."""
    p = Path(path)
    if not p.is_file():
        raise PlugError(f"external partition file {str(p)!r} does not exist")
    try:
        return read_labels(p, g)
    except (CoverageError, ParseError, ValueError) as exc:
        raise PlugError(f"{p}: {exc}") from exc


def walktrap(n, indptr, indices, t=4) -> np.ndarray:
    """Walktrap agglomeration cut at maximal modularity.

    Each vertex carries a unit self-loop for the walk, as in the reference
    implementation; modularity for the cut uses the graph without them.
    """
    if n > WALKTRAP_MAX_N:
        raise ValueError(f"walktrap keeps dense walk vectors; n={n} exceeds {WALKTRAP_MAX_N}")
    indptr = np.asarray(indptr)
    indices = np.asarray(indices)
    deg = np.diff(indptr).astype(np.float64)
    m = deg.sum() / 2.0
    if m == 0:
        return np.arange(n, dtype=np.int64)
    a = np.zeros((n, n))
    rows = np.repeat(np.arange(n), np.diff(indptr))
    a[rows, indices] = 1.0
    a[np.arange(n), np.arange(n)] += 1.0
    d = a.sum(axis=1)
    p = a / d[:, None]
    pt = np.linalg.matrix_power(p, t)
    # walk vectors pre-scaled by D^{-1/2} so distances are plain Euclidean
    vec = {i: pt[i] / np.sqrt(d) for i in range(n)}
    size = {i: 1 for i in range(n)}
    links: dict[int, dict[int, int]] = {i: {} for i in range(n)}
    for i, j in zip(rows.tolist(), indices.tolist()):
        links[i][j] = links[i].get(j, 0) + 1
    tot = {i: deg[i] for i in range(n)}

    def delta(i, j):
        diff = vec[i] - vec[j]
        si, sj = size[i], size[j]
        return (si * sj / (si + sj)) * float(diff @ diff) / n

    heap = []
    for i in range(n):
        for j in links[i]:
            if i < j:
                heap.append((delta(i, j), i, j))
    heapq.heapify(heap)
    alive = set(range(n))
    two_m = 2.0 * m
    q = -float(np.sum((deg / two_m) ** 2))
    best_q, best_step = q, 0
    merges = []
    nxt = n
    while heap:
        ds, i, j = heapq.heappop(heap)
        if i not in alive or j not in alive:
            continue
        c = nxt
        nxt += 1
        si, sj = size[i], size[j]
        vec[c] = (si * vec[i] + sj * vec[j]) / (si + sj)
        size[c] = si + sj
        e_ij = links[i].get(j, 0)
        q += e_ij / m - 2.0 * tot[i] * tot[j] / (two_m * two_m)
        tot[c] = tot[i] + tot[j]
        merged: dict[int, int] = {}
        for src in (i, j):
            for k2, w in links[src].items():
                if k2 in (i, j):
                    continue
                merged[k2] = merged.get(k2, 0) + w
                del links[k2][src]
        for k2, w in merged.items():
            links[k2][c] = w
        links[c] = merged
        alive.discard(i)
        alive.discard(j)
        for src in (i, j):
            del links[src], vec[src]
        alive.add(c)
        for k2 in merged:
            heapq.heappush(heap, (delta(c, k2), min(c, k2), max(c, k2)))
        merges.append((i, j, c))
        if q > best_q + 1e-12:
            best_q, best_step = q, len(merges)
    parent = np.arange(n + len(merges), dtype=np.int64)
    for i, j, c in merges[:best_step]:
        parent[i] = c
        parent[j] = c
    lab = np.arange(n, dtype=np.int64)
    for v in range(n):
        r = v
        while parent[r] != r:
            r = parent[r]
        lab[v] = r
    return Partition(lab).labels
