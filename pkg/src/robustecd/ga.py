"""Genetic rewiring: evolve edge modification schemes that sharpen communities.

A chromosome is a pair of gene segments, edges to add and edges to delete,
stored as packed pair codes. Fitness rewires the graph, runs the detector
and scores the partition by modularity, penalized when the community count
misses the known ground-truth count.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Protocol, Sequence

import numpy as np

from .detectors import as_spec, detect
from .errors import ConfigError
from .graph import Graph, ModificationScheme, Partition, budget, rewire_codes
from .metrics import modularity


# -- candidate sets ------------------------------------------------------------


@dataclass(frozen=True)
class CandidateSets:
    """The four intra/inter x add/del pools, as sorted pair codes."""

    n: int
    intra_add: np.ndarray
    intra_del: np.ndarray
    inter_add: np.ndarray
    inter_del: np.ndarray

    def pairs(self, name) -> list[tuple[int, int]]:
        c = getattr(self, name)
        return list(zip((c // self.n).tolist(), (c % self.n).tolist()))

    @property
    def edges(self) -> np.ndarray:
        return np.union1d(self.intra_del, self.inter_del)

    @property
    def nonedges(self) -> np.ndarray:
        return np.union1d(self.intra_add, self.inter_add)


def build_candidate_sets(g: Graph, p: Partition) -> CandidateSets:
    lab = p.labels
    if lab.shape[0] != g.n:
        raise ValueError("partition does not cover the graph's vertices")
    ec = g.edge_codes
    same_e = lab[ec // g.n] == lab[ec % g.n]
    # intra non-edges: all same-block pairs minus the intra edges
    intra_pairs = []
    for block in p.blocks():
        if block.shape[0] < 2:
            continue
        b = np.sort(block)
        iu, ju = np.triu_indices(b.shape[0], k=1)
        intra_pairs.append(b[iu] * g.n + b[ju])
    intra_all = np.sort(np.concatenate(intra_pairs)) if intra_pairs else np.zeros(0, np.int64)
    intra_add = intra_all[~g.contains_codes(intra_all)]
    if g.num_pairs <= 5_000_000:
        iu, ju = np.triu_indices(g.n, k=1)
        allc = iu.astype(np.int64) * g.n + ju
        inter_add = allc[(lab[iu] != lab[ju]) & ~g.contains_codes(allc)]
    else:
        raise ValueError("inter-community addition pool is too large to enumerate")
    return CandidateSets(g.n, intra_add, ec[same_e], inter_add, ec[~same_e])


def admissible_pools(cs: CandidateSets, phi_s: int, phi_real: int | None = None):
    """``(add_pool, del_pool)`` for the resolution scenario at hand."""
    if phi_s < 1:
        raise ValueError("phi_s must be positive")
    if phi_real is None or phi_s == phi_real:
        return cs.intra_add, cs.inter_del
    if phi_s > phi_real:
        return cs.nonedges, cs.inter_del
    return cs.intra_add, cs.edges


# -- fitness ---------------------------------------------------------------------


def fitness_value(q: float, phi_s: int, phi_real: int | None) -> float:
    if phi_real is None:
        return abs(q)
    return abs(q) / math.exp(abs(phi_s - phi_real))


def _score(g: Graph, part: Partition, phi_real):
    q = modularity(g, part) if g.m else 0.0
    return fitness_value(q, part.k, phi_real)


def fitness(g: Graph, scheme: ModificationScheme, detector, phi_real=None, rng=None) -> float:
    """Rewire ``g`` by ``scheme``, detect, and score the resulting partition."""
    from .graph import apply_modification

    rewired = apply_modification(g, scheme)
    part = detect(as_spec(detector), rewired, rng)
    return _score(rewired, part, phi_real)


# -- generic evolution engine -------------------------------------------------------


@dataclass
class GAConfig:
    population_size: int = 120
    crossover_rate: float = 0.8
    mutation_rate: float = 0.02
    elitism: float = 0.2
    generations: int = 1000
    beta_a: float = 1.0
    beta_d: float = 0.05
    ground_truth_k: int | None = None
    plateau: int = 100

    def __post_init__(self):
        for name in ("crossover_rate", "mutation_rate", "elitism"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1], got {v}")
        if self.population_size < 2:
            raise ConfigError("population_size must be at least 2")
        if self.generations < 1:
            raise ConfigError("generations must be at least 1")
        if self.beta_a <= 0 or self.beta_d <= 0:
            raise ConfigError("budgets must be positive")
        if self.plateau is not None and self.plateau < 1:
            raise ConfigError("plateau must be at least 1")

    @property
    def n_elite(self) -> int:
        return min(self.population_size, math.ceil(self.elitism * self.population_size - 1e-9))


class Problem(Protocol):
    def random_individual(self, rng): ...
    def crossover(self, a, b, rng): ...
    def mutate(self, ind, rate, rng): ...
    def evaluate(self, ind, seed) -> float: ...


@dataclass
class EvolutionResult:
    population: list
    fitnesses: np.ndarray
    best_in_population: list = field(default_factory=list)
    best_so_far: list = field(default_factory=list)
    best_individual: object = None
    best_fitness: float = float("-inf")
    generations_run: int = 0

    @property
    def last_best(self):
        i = int(np.argmax(self.fitnesses))
        return self.population[i], float(self.fitnesses[i])


def roulette(fit: np.ndarray, count: int, rng) -> np.ndarray:
    """Indices drawn with probability proportional to fitness."""
    total = float(fit.sum())
    if not np.isfinite(total) or total <= 0:
        return rng.integers(0, fit.shape[0], size=count)
    return rng.choice(fit.shape[0], size=count, replace=True, p=fit / total)


def _seeds(rng, count):
    return rng.integers(0, 2**63 - 1, size=count, dtype=np.int64).tolist()


def evolve(problem: Problem, cfg: GAConfig, rng, on_generation: Callable | None = None) -> EvolutionResult:
    """Elitist generational GA with roulette selection."""
    pop_n = cfg.population_size
    pop = [problem.random_individual(rng) for _ in range(pop_n)]
    fit = np.array([problem.evaluate(ind, s) for ind, s in zip(pop, _seeds(rng, pop_n))], dtype=np.float64)
    res = EvolutionResult(pop, fit)

    def track():
        i = int(np.argmax(fit))
        if fit[i] > res.best_fitness:
            res.best_fitness = float(fit[i])
            res.best_individual = pop[i]
        res.best_in_population.append(float(fit[i]))
        res.best_so_far.append(res.best_fitness)

    track()
    if on_generation is not None:
        on_generation(0, pop, fit)
    n_elite = cfg.n_elite
    stale = 0
    for gen in range(1, cfg.generations + 1):
        elite_idx = np.argsort(-fit, kind="stable")[:n_elite]
        elites = [pop[i] for i in elite_idx]
        chosen = roulette(fit, pop_n, rng)
        parents = [pop[i] for i in chosen]
        offspring = []
        for k in range(0, pop_n - 1, 2):
            a, b = parents[k], parents[k + 1]
            if rng.random() < cfg.crossover_rate:
                a, b = problem.crossover(a, b, rng)
            offspring += [a, b]
        if pop_n % 2:
            offspring.append(parents[-1])
        offspring = [problem.mutate(ind, cfg.mutation_rate, rng) for ind in offspring]
        seeds = _seeds(rng, pop_n)
        off_fit = np.array([problem.evaluate(ind, s) for ind, s in zip(offspring, seeds)], dtype=np.float64)
        if n_elite:
            # best parents replace the worst offspring; elites are re-evaluated
            worst = np.argsort(off_fit, kind="stable")[:n_elite]
            elite_seeds = _seeds(rng, n_elite)
            for slot, ind, s in zip(worst.tolist(), elites, elite_seeds):
                offspring[slot] = ind
                off_fit[slot] = problem.evaluate(ind, s)
        pop, fit = offspring, off_fit
        res.population, res.fitnesses = pop, fit
        prev = res.best_fitness
        track()
        res.generations_run = gen
        if on_generation is not None:
            on_generation(gen, pop, fit)
        stale = stale + 1 if res.best_fitness <= prev else 0
        if cfg.plateau is not None and stale >= cfg.plateau:
            break
    return res


# -- segment operators -----------------------------------------------------------


def _dedupe(a: np.ndarray) -> np.ndarray:
    _, first = np.unique(a, return_index=True)
    return a[np.sort(first)] if first.shape[0] != a.shape[0] else a


def two_point_crossover(a: np.ndarray, b: np.ndarray, rng):
    """Swap a random slice between two segments; both keep their lengths."""
    lim = min(a.shape[0], b.shape[0])
    if lim == 0:
        return a, b
    c1, c2 = np.sort(rng.integers(0, lim + 1, size=2))
    if c1 == c2:
        return a, b
    na, nb = a.copy(), b.copy()
    na[c1:c2], nb[c1:c2] = b[c1:c2], a[c1:c2]
    return _dedupe(na), _dedupe(nb)


def mutate_segment(seg: np.ndarray, pool: np.ndarray, rate: float, rng) -> np.ndarray:
    """Replace each gene with probability ``rate`` by an absent pool member."""
    if seg.shape[0] == 0 or rate <= 0:
        return seg
    hits = np.flatnonzero(rng.random(seg.shape[0]) < rate)
    if hits.shape[0] == 0:
        return seg
    out = seg.copy()
    keep = np.ones(seg.shape[0], dtype=bool)
    present = set(seg.tolist())
    for h in hits.tolist():
        free = pool.shape[0] - len(present)
        if free <= 0:
            keep[h] = False
            continue
        # rejection draw; fall back to explicit exclusion when the pool is crowded
        if free * 4 >= pool.shape[0]:
            while True:
                cand = int(pool[rng.integers(0, pool.shape[0])])
                if cand not in present:
                    break
        else:
            rest = pool[~np.isin(pool, np.fromiter(present, dtype=np.int64))]
            cand = int(rest[rng.integers(0, rest.shape[0])])
        present.discard(int(out[h]))
        present.add(cand)
        out[h] = cand
    return out[keep]


def _draw(pool: np.ndarray, cap: int, rng) -> np.ndarray:
    size = int(rng.integers(0, cap + 1))
    size = min(size, pool.shape[0])
    if size == 0:
        return np.zeros(0, dtype=np.int64)
    return pool[rng.choice(pool.shape[0], size=size, replace=False)]


@dataclass
class RewiringProblem:
    """Chromosome ``(add_codes, del_codes)`` over fixed admissible pools."""

    g: Graph
    detector: object
    add_pool: np.ndarray
    del_pool: np.ndarray
    cap_add: int
    cap_del: int
    phi_real: int | None = None

    def random_individual(self, rng):
        return _draw(self.add_pool, self.cap_add, rng), _draw(self.del_pool, self.cap_del, rng)

    def crossover(self, a, b, rng):
        a_add, b_add = two_point_crossover(a[0], b[0], rng)
        a_del, b_del = two_point_crossover(a[1], b[1], rng)
        return (a_add, a_del), (b_add, b_del)

    def mutate(self, ind, rate, rng):
        return (
            mutate_segment(ind[0], self.add_pool, rate, rng),
            mutate_segment(ind[1], self.del_pool, rate, rng),
        )

    def rewire(self, ind) -> Graph:
        return rewire_codes(self.g, ind[0], ind[1])

    def evaluate_full(self, ind, seed):
        rewired = self.rewire(ind)
        part = detect(self.detector, rewired, np.random.default_rng(seed))
        return _score(rewired, part, self.phi_real), part

    def evaluate(self, ind, seed) -> float:
        return self.evaluate_full(ind, seed)[0]

    def is_valid(self, ind) -> bool:
        add, dele = ind
        return (
            add.shape[0] <= self.cap_add
            and dele.shape[0] <= self.cap_del
            and np.unique(add).shape[0] == add.shape[0]
            and np.unique(dele).shape[0] == dele.shape[0]
            and bool(np.isin(add, self.add_pool).all())
            and bool(np.isin(dele, self.del_pool).all())
        )

    def scheme(self, ind) -> ModificationScheme:
        return ModificationScheme.from_codes(self.g.n, ind[0], ind[1])


@dataclass
class GAResult:
    graph: Graph
    partition: Partition
    scheme: ModificationScheme
    fitness: float
    initial_partition: Partition
    history: EvolutionResult


def make_problem(g: Graph, detector, cfg: GAConfig, initial: Partition) -> RewiringProblem:
    cs = build_candidate_sets(g, initial)
    add_pool, del_pool = admissible_pools(cs, initial.k, cfg.ground_truth_k)
    if add_pool.shape[0] == 0:
        warnings.warn("empty admissible addition pool; add segments stay empty", stacklevel=3)
    if del_pool.shape[0] == 0:
        warnings.warn("empty admissible deletion pool; delete segments stay empty", stacklevel=3)
    return RewiringProblem(
        g, as_spec(detector), add_pool, del_pool,
        budget(g.m, cfg.beta_a), budget(g.m, cfg.beta_d), cfg.ground_truth_k,
    )


def run_ga(g: Graph, detector, cfg: GAConfig | None = None, rng=None,
           on_generation: Callable | None = None) -> GAResult:
    """Evolve a rewiring of ``g`` and return the detector's partition on it."""
    cfg = cfg or GAConfig()
    rng = np.random.default_rng(rng)
    spec = as_spec(detector)
    initial = detect(spec, g, rng)
    problem = make_problem(g, spec, cfg, initial)
    evo = evolve(problem, cfg, rng, on_generation)
    best, best_fit = evo.last_best
    rewired = problem.rewire(best)
    part = detect(spec, rewired, rng)
    return GAResult(rewired, part, problem.scheme(best), best_fit, initial, evo)
