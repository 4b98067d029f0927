"""Experiment orchestration: datasets, seeded trials, and reports.

Every random stream of an experiment is derived from ``(base_seed, trial,
tag)``, so a config file alone pins down its report. Reference (unenhanced)
and enhanced runs of a detector share per-trial seeds.
"""

from __future__ import annotations

import json
import os
import time
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from importlib.resources import files
from pathlib import Path

import numpy as np

from .adversarial import AttackConfig, dm_deception, q_attack
from .detectors import DetectorSpec, detect
from .errors import ConfigError, ExperimentError, RegistryError, RobustECDError
from .ga import GAConfig, run_ga
from .graph import Graph, Partition, read_edge_list, read_labels
from .metrics import MetricsReport, ari, modularity, nmi
from .se import SEConfig, run_se

METHODS = ("none", "ga", "se")
DATA_ENV = "ROBUSTECD_DATA"


# -- datasets --------------------------------------------------------------------


@dataclass(frozen=True)
class Dataset:
    name: str
    graph: Graph
    truth: Partition
    graph_path: str
    labels_path: str

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def m(self) -> int:
        return self.graph.m

    @property
    def k(self) -> int:
        return self.truth.k


class Registry:
    def __init__(self):
        self._entries: dict[str, Dataset] = {}

    def register(self, name, graph_path, labels_path) -> Dataset:
        if name in self._entries:
            raise RegistryError(f"dataset {name!r} is already registered")
        g = read_edge_list(graph_path)
        truth = read_labels(labels_path, g)
        entry = Dataset(name, g, truth, str(graph_path), str(labels_path))
        self._entries[name] = entry
        return entry

    def get(self, name) -> Dataset:
        if name in self._entries:
            return self._entries[name]
        root = os.environ.get(DATA_ENV)
        if root:
            gp, lp = Path(root) / f"{name}.edges", Path(root) / f"{name}.labels"
            if gp.is_file() and lp.is_file():
                return self.register(name, gp, lp)
        hint = f" (looked in ${DATA_ENV}={root})" if root else f" (set ${DATA_ENV} to a directory with {name}.edges and {name}.labels)"
        raise RegistryError(f"unknown dataset {name!r}{hint}")

    def __contains__(self, name):
        return name in self._entries

    def names(self):
        return sorted(self._entries)


def _builtin_registry() -> Registry:
    reg = Registry()
    data = files("robustecd") / "data"
    reg.register("karate", data / "karate.edges", data / "karate.labels")
    return reg


REGISTRY = _builtin_registry()


def register_dataset(name, graph_path, labels_path) -> Dataset:
    return REGISTRY.register(name, graph_path, labels_path)


def load_dataset(name) -> Dataset:
    return REGISTRY.get(name)


# -- seeding ---------------------------------------------------------------------------


def derive_rng(base_seed: int, trial: int, tag: str) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(base_seed), int(trial), zlib.crc32(tag.encode())]))


# -- configuration ----------------------------------------------------------------------


def _ga_from(d, k) -> GAConfig:
    d = dict(d or {})
    if d.get("ground_truth_k") == "auto":
        d["ground_truth_k"] = k
    return GAConfig(**d)


def _se_from(d, k) -> SEConfig:
    d = dict(d or {})
    if d.get("ground_truth_k") == "auto":
        d["ground_truth_k"] = k
    if "indices" in d:
        d["indices"] = tuple(d["indices"])
    return SEConfig(**d)


@dataclass
class ExperimentConfig:
    dataset: str = "karate"
    graph: str | None = None
    labels: str | None = None
    detectors: list = field(default_factory=lambda: ["louvain"])
    method: str = "none"
    ga: dict = field(default_factory=dict)
    se: dict = field(default_factory=dict)
    attack: dict | None = None
    trials: int = 50
    base_seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if self.method not in METHODS:
            raise ConfigError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        if (self.graph is None) != (self.labels is None):
            raise ConfigError("graph and labels paths must be given together")
        for p in (self.graph, self.labels):
            if p is not None and not Path(p).is_file():
                raise ConfigError(f"file {p!r} does not exist")
        self.detectors = [DetectorSpec(**d) if isinstance(d, dict) else DetectorSpec(d) for d in self.detectors]
        if not self.detectors:
            raise ConfigError("at least one detector is required")

    @classmethod
    def from_dict(cls, d) -> "ExperimentConfig":
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        return cls(**d)

    @classmethod
    def from_json(cls, text) -> "ExperimentConfig":
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON config: {exc}") from exc

    def load(self) -> Dataset:
        if self.graph is not None:
            g = read_edge_list(self.graph)
            return Dataset(self.dataset, g, read_labels(self.labels, g), self.graph, self.labels)
        return load_dataset(self.dataset)


# -- execution -------------------------------------------------------------------------


def prepare_target(cfg: ExperimentConfig, ds: Dataset) -> Graph:
    """The graph trials run on: the dataset, or its attacked version."""
    if not cfg.attack:
        return ds.graph
    a = dict(cfg.attack)
    ga = GAConfig(**a.pop("ga")) if "ga" in a else GAConfig(generations=100)
    acfg = AttackConfig(ga=ga, **a)
    rng = derive_rng(cfg.base_seed, 0, "attack")
    if acfg.method == "q_attack":
        return q_attack(ds.graph, acfg, rng)
    return dm_deception(ds.graph, ds.truth, acfg, rng)


def _enhanced_partition(method, g, spec, cfg_obj, rng) -> Partition:
    if method == "none":
        return detect(spec, g, rng)
    if method == "ga":
        return run_ga(g, spec, cfg_obj, rng).partition
    return run_se(g, spec, cfg_obj, rng)


def _trial(args):
    method, g, truth, spec, cfg_obj, base_seed, trial = args
    rng = derive_rng(base_seed, trial, spec.kind)
    t0 = time.perf_counter()
    try:
        p = _enhanced_partition(method, g, spec, cfg_obj, rng)
    except (RobustECDError, ValueError, RuntimeError) as exc:
        return trial, None, f"{type(exc).__name__}: {exc}", time.perf_counter() - t0
    vals = (nmi(p, truth), ari(p, truth), modularity(g, p) if g.m else 0.0)
    return trial, vals, None, time.perf_counter() - t0


@dataclass
class ExperimentResult:
    report: MetricsReport
    timings: dict
    graph: Graph


def _run_method(method, g, ds, spec, cfg_obj, cfg: ExperimentConfig, pool):
    jobs = [(method, g, ds.truth, spec, cfg_obj, cfg.base_seed, i) for i in range(cfg.trials)]
    results = list(pool.map(_trial, jobs)) if pool else [_trial(j) for j in jobs]
    results.sort(key=lambda r: r[0])
    ok = [r[1] for r in results if r[1] is not None]
    fails = [(r[0], r[2]) for r in results if r[1] is None]
    if len(fails) * 2 > cfg.trials:
        detail = "; ".join(f"trial {t}: {msg}" for t, msg in fails[:5])
        raise ExperimentError(f"{len(fails)}/{cfg.trials} trials failed for {spec.name}/{method}: {detail}")
    return np.array(ok).reshape(-1, 3), fails, sum(r[3] for r in results)


def run_experiment_full(cfg: ExperimentConfig) -> ExperimentResult:
    ds = cfg.load()
    g = prepare_target(cfg, ds)
    report = MetricsReport()
    timings = {}
    pool = ProcessPoolExecutor(cfg.workers) if cfg.workers > 1 else None
    try:
        for spec in cfg.detectors:
            methods = ["none"] if cfg.method == "none" else ["none", cfg.method]
            refs = {}
            for method in methods:
                cfg_obj = None
                if method == "ga":
                    cfg_obj = _ga_from(cfg.ga, ds.k)
                elif method == "se":
                    cfg_obj = _se_from(cfg.se, ds.k)
                vals, fails, secs = _run_method(method, g, ds, spec, cfg_obj, cfg, pool)
                timings[(spec.name, method)] = secs
                report.failures += [f"{spec.name}/{method}/trial {t}: {msg}" for t, msg in fails]
                for col, metric in enumerate(("nmi", "ari", "q")):
                    row = report.add(ds.name, spec.name, method, metric, vals[:, col].tolist(), refs.get(metric))
                    if method == "none":
                        refs[metric] = row
    finally:
        if pool:
            pool.shutdown()
    return ExperimentResult(report, timings, g)


def run_experiment(cfg: ExperimentConfig) -> MetricsReport:
    return run_experiment_full(cfg).report
