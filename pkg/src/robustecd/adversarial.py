"""Adversarial and missing-data network generators.

``q_attack`` searches degree-preserving double-edge swaps that minimize the
modularity a detector achieves. ``dm_deception`` greedily hides one
community by deleting its internal edges or wiring it to outsiders.
``extract_missing_data_subgraph`` grows ego networks around degree-weighted
seeds to mimic an incompletely observed network.
"""

from __future__ import annotations

import math
import warnings
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .detectors import as_spec, detect
from .errors import ConfigError
from .ga import GAConfig, evolve
from .graph import Graph, Partition, weighted_sample_without_replacement
from .metrics import modularity


@dataclass
class AttackConfig:
    method: str = "q_attack"
    budget: int = 5
    detector: str = "louvain"
    target_community: int | None = None
    ga: GAConfig = field(default_factory=lambda: GAConfig(generations=200))

    def __post_init__(self):
        if self.method in ("q", "qattack"):
            self.method = "q_attack"
        if self.method not in ("q_attack", "dm"):
            raise ConfigError(f"unknown attack method {self.method!r}")
        if self.budget < 0:
            raise ConfigError("attack budget must be nonnegative")
        if self.method == "dm" and self.target_community is None:
            raise ConfigError("dm deception needs a target community")


@dataclass
class ExtractionConfig:
    x: int = 15
    h: int = 4

    def __post_init__(self):
        if self.x < 1 or self.h < 1:
            raise ConfigError("x and h must both be at least 1")


# -- Q-Attack --------------------------------------------------------------------


def random_swap(g: Graph, rng, edges=None, tries: int = 200):
    """A double-edge swap ``(u, v, x, y)``: drop uv and xy, add ux and vy."""
    e = g.edges if edges is None else edges
    for _ in range(tries):
        a, b = rng.choice(e.shape[0], size=2, replace=False)
        u, v = e[a] if rng.random() < 0.5 else e[a][::-1]
        x, y = e[b] if rng.random() < 0.5 else e[b][::-1]
        if len({int(u), int(v), int(x), int(y)}) < 4:
            continue
        if g.has_edge(u, x) or g.has_edge(v, y):
            continue
        return int(u), int(v), int(x), int(y)
    return None


def apply_swaps(g: Graph, swaps) -> tuple[Graph, int]:
    """Apply swaps in order, skipping any invalidated by earlier ones."""
    n = g.n
    edges = set(g.edge_codes.tolist())

    def code(a, b):
        return a * n + b if a < b else b * n + a

    done = 0
    for u, v, x, y in swaps:
        d1, d2, a1, a2 = code(u, v), code(x, y), code(u, x), code(v, y)
        if d1 in edges and d2 in edges and a1 not in edges and a2 not in edges and a1 != a2:
            edges.difference_update((d1, d2))
            edges.update((a1, a2))
            done += 1
    return Graph.from_codes(n, np.fromiter(edges, dtype=np.int64, count=len(edges)), g.labels), done


@dataclass
class SwapProblem:
    g: Graph
    detector: object
    size: int

    def __post_init__(self):
        self._edges = self.g.edges

    def _swap(self, rng):
        s = random_swap(self.g, rng, self._edges)
        if s is None:
            raise ConfigError("graph admits no degree-preserving swap")
        return s

    def random_individual(self, rng):
        return tuple(self._swap(rng) for _ in range(self.size))

    def crossover(self, a, b, rng):
        if self.size < 2:
            return a, b
        c1, c2 = sorted(rng.integers(0, self.size + 1, size=2).tolist())
        return a[:c1] + b[c1:c2] + a[c2:], b[:c1] + a[c1:c2] + b[c2:]

    def mutate(self, ind, rate, rng):
        hits = rng.random(len(ind)) < rate
        if not hits.any():
            return ind
        return tuple(self._swap(rng) if h else s for s, h in zip(ind, hits.tolist()))

    def evaluate(self, ind, seed) -> float:
        attacked, _ = apply_swaps(self.g, ind)
        part = detect(self.detector, attacked, np.random.default_rng(seed))
        return math.exp(-modularity(attacked, part))


def q_attack(g: Graph, cfg: AttackConfig | None = None, rng=None, truth: Partition | None = None) -> Graph:
    """Degree-preserving rewiring that minimizes the detector's modularity.

    ``truth`` is accepted for interface symmetry with ``dm_deception``; the
    attack only looks at the detector's own partitions.
    """
    cfg = cfg or AttackConfig()
    rng = np.random.default_rng(rng)
    if cfg.budget == 0:
        return g
    feasible = g.m >= 2 and random_swap(g, rng) is not None
    if not feasible:
        warnings.warn("no degree-preserving swap exists; graph returned unchanged", stacklevel=2)
        return g
    problem = SwapProblem(g, as_spec(cfg.detector), cfg.budget)
    evo = evolve(problem, cfg.ga, rng)
    best, _ = evo.last_best
    attacked, done = apply_swaps(g, best)
    if done < cfg.budget:
        warnings.warn(f"only {done} of {cfg.budget} swaps remained valid in sequence", stacklevel=2)
    return attacked


# -- D_m deception --------------------------------------------------------------------


def _community_stats(g: Graph, lab: np.ndarray):
    k = int(lab.max()) + 1
    e = g.edges
    same = lab[e[:, 0]] == lab[e[:, 1]]
    internal = np.bincount(lab[e[same, 0]], minlength=k).astype(np.float64)
    deg = np.bincount(lab, weights=g.degrees.astype(np.float64), minlength=k)
    return internal, deg


def deception_moves(g: Graph, lab: np.ndarray, target: int):
    """All candidate moves with their exact modularity change.

    Returns ``(kind, u, v, dq)`` arrays; kind 0 deletes an intra-target edge,
    kind 1 adds an edge from a target vertex to a vertex outside it.
    """
    m = float(g.m)
    internal, deg = _community_stats(g, lab)
    s_l, s_d2 = internal.sum(), float(np.sum(deg ** 2))
    q0 = s_l / m - s_d2 / (4 * m * m) if m else 0.0
    e = g.edges
    in_t = lab == target
    intra = e[in_t[e[:, 0]] & in_t[e[:, 1]]]
    kinds, us, vs, dqs = [], [], [], []
    if intra.shape[0] and m > 1:
        dt = deg[target]
        q_del = (s_l - 1) / (m - 1) - (s_d2 - dt ** 2 + (dt - 2) ** 2) / (4 * (m - 1) ** 2)
        kinds.append(np.zeros(intra.shape[0], dtype=np.int64))
        us.append(intra[:, 0])
        vs.append(intra[:, 1])
        dqs.append(np.full(intra.shape[0], q_del - q0))
    tv = np.flatnonzero(in_t)
    ov = np.flatnonzero(~in_t)
    if tv.shape[0] and ov.shape[0]:
        uu, ww = np.meshgrid(tv, ov, indexing="ij")
        uu, ww = uu.ravel(), ww.ravel()
        free = ~g.contains_codes(np.minimum(uu, ww) * g.n + np.maximum(uu, ww))
        uu, ww = uu[free], ww[free]
        if uu.shape[0]:
            dt = deg[target]
            dd = deg[lab[ww]]
            d2 = s_d2 - dt ** 2 - dd ** 2 + (dt + 1) ** 2 + (dd + 1) ** 2
            q_add = s_l / (m + 1) - d2 / (4 * (m + 1) ** 2)
            kinds.append(np.ones(uu.shape[0], dtype=np.int64))
            us.append(uu)
            vs.append(ww)
            dqs.append(q_add - q0)
    if not kinds:
        empty = np.zeros(0, dtype=np.int64)
        return empty, empty, empty, np.zeros(0)
    return np.concatenate(kinds), np.concatenate(us), np.concatenate(vs), np.concatenate(dqs)


def dm_deception(g: Graph, truth: Partition, cfg: AttackConfig, rng=None, trace: list | None = None) -> Graph:
    """Greedy modularity-based deception hiding ``cfg.target_community``.

    ``trace``, when given, receives ``(kind, u, v, dq)`` for each executed step.
    """
    rng = np.random.default_rng(rng)
    lab = truth.labels
    if cfg.target_community is None or not 0 <= cfg.target_community < truth.k:
        raise ConfigError(f"target community {cfg.target_community!r} is not a label of the partition")
    cur = g
    for step in range(cfg.budget):
        kind, u, v, dq = deception_moves(cur, lab, cfg.target_community)
        if dq.shape[0] == 0:
            warnings.warn(f"move pools exhausted after {step} of {cfg.budget} steps", stacklevel=2)
            break
        best = dq.min()
        if best > 0:
            warnings.warn(f"no modularity-reducing move left after {step} steps", stacklevel=2)
            break
        # ties compared with a small relative tolerance to absorb round-off
        tied = np.flatnonzero(dq <= best + 1e-12 * max(1.0, abs(best)))
        pick = int(tied[rng.integers(0, tied.shape[0])])
        code = np.array([min(u[pick], v[pick]) * cur.n + max(u[pick], v[pick])], dtype=np.int64)
        if kind[pick] == 0:
            keep = cur.edge_codes[cur.edge_codes != code[0]]
        else:
            keep = np.concatenate([cur.edge_codes, code])
        cur = Graph.from_codes(cur.n, keep, cur.labels)
        if trace is not None:
            trace.append((int(kind[pick]), int(u[pick]), int(v[pick]), float(dq[pick])))
    return cur


# -- missing-data extraction ------------------------------------------------------------


def sample_seeds(g: Graph, x: int, rng) -> np.ndarray:
    """``x`` distinct vertices drawn with probability proportional to degree."""
    if x > g.n:
        raise ConfigError(f"cannot draw {x} seeds from {g.n} vertices")
    seeds = weighted_sample_without_replacement(g.degrees, x, rng)
    short = x - seeds.shape[0]
    if short:
        # zero-degree vertices only enter once every connected vertex is taken
        rest = np.setdiff1d(np.arange(g.n), seeds)
        seeds = np.concatenate([seeds, rng.choice(rest, size=short, replace=False)])
    return seeds


def ego_network(g: Graph, source: int, h: int) -> set:
    seen = {source}
    frontier = deque([(source, 0)])
    while frontier:
        u, d = frontier.popleft()
        if d == h:
            continue
        for v in g.neighbors(u).tolist():
            if v not in seen:
                seen.add(v)
                frontier.append((v, d + 1))
    return seen


def extract_missing_data_subgraph(g: Graph, truth, cfg: ExtractionConfig, rng=None,
                                  ) -> tuple[Graph, Partition]:
    """Union of ``h``-hop ego networks around degree-weighted seeds.

    ``truth`` is a Partition, or a per-vertex sequence of label collections
    for overlapping ground truth; vertices with several labels are dropped.
    """
    rng = np.random.default_rng(rng)
    if cfg.x > g.n:
        raise ConfigError(f"x={cfg.x} exceeds the vertex count {g.n}")
    seeds = sample_seeds(g, cfg.x, rng)
    keep: set = set()
    for s in seeds.tolist():
        keep |= ego_network(g, s, cfg.h)
    if isinstance(truth, Partition):
        single = truth.labels
    else:
        memberships = [tuple(t) if not isinstance(t, (int, np.integer, str)) else (t,) for t in truth]
        keep = {v for v in keep if len(set(memberships[v])) == 1}
        single = [memberships[v][0] if len(memberships[v]) else None for v in range(g.n)]
    verts = np.array(sorted(keep), dtype=np.int64)
    sub = g.subgraph(verts)
    return sub, Partition([single[v] for v in verts.tolist()])
