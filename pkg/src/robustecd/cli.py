"""Command-line interface."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .adversarial import AttackConfig, ExtractionConfig, dm_deception, extract_missing_data_subgraph, q_attack
from .bench import ExperimentConfig, run_experiment_full
from .detectors import DetectorSpec, detect
from .errors import RobustECDError
from .ga import GAConfig, run_ga
from .graph import format_edge_list, format_partition, read_edge_list, read_labels
from .metrics import ari, modularity, nmi
from .se import SEConfig, run_se
from .similarity import KINDS


def _emit(text: str, path):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _detector(args) -> DetectorSpec:
    return DetectorSpec(args.detector, walk_length=args.walk_length, path=getattr(args, "external", None))


def _load(args):
    g = read_edge_list(args.graph)
    truth = read_labels(args.labels, g) if getattr(args, "labels", None) else None
    return g, truth


def cmd_detect(args):
    g, _ = _load(args)
    p = detect(_detector(args), g, np.random.default_rng(args.seed))
    _emit(format_partition(p, g), args.out_partition)


def cmd_enhance_ga(args):
    g, truth = _load(args)
    cfg = GAConfig(
        population_size=args.pop, crossover_rate=args.pc, mutation_rate=args.pm, elitism=args.pe,
        generations=args.gens, beta_a=args.beta_a, beta_d=args.beta_d,
        ground_truth_k=truth.k if truth is not None else None,
    )
    res = run_ga(g, _detector(args), cfg, np.random.default_rng(args.seed))
    _emit(format_partition(res.partition, g), args.out_partition)
    if args.out_graph:
        _emit(format_edge_list(res.graph), args.out_graph)


def cmd_enhance_se(args):
    g, truth = _load(args)
    cfg = SEConfig(
        beta_a=args.beta_a, samples_per_index=args.samples, indices=tuple(args.indices.split(",")),
        s_min=args.smin, threshold_mode=args.threshold_mode,
        ground_truth_k=truth.k if truth is not None else None,
    )
    p = run_se(g, _detector(args), cfg, np.random.default_rng(args.seed))
    _emit(format_partition(p, g), args.out_partition)


def cmd_attack(args):
    g, truth = _load(args)
    ga = GAConfig(population_size=args.pop, generations=args.gens)
    cfg = AttackConfig(method=args.method, budget=args.budget, detector=args.detector,
                       target_community=args.target, ga=ga)
    rng = np.random.default_rng(args.seed)
    if cfg.method == "q_attack":
        out = q_attack(g, cfg, rng)
    else:
        if truth is None:
            raise RobustECDError("dm deception needs --labels")
        out = dm_deception(g, truth, cfg, rng)
    _emit(format_edge_list(out), args.out)


def cmd_extract(args):
    g, truth = _load(args)
    sub, part = extract_missing_data_subgraph(g, truth, ExtractionConfig(args.x, args.h), np.random.default_rng(args.seed))
    Path(f"{args.out_prefix}.edges").write_text(format_edge_list(sub), encoding="utf-8")
    Path(f"{args.out_prefix}.labels").write_text(format_partition(part, sub), encoding="utf-8")


def cmd_evaluate(args):
    g, truth = _load(args)
    p = read_labels(args.partition, g)
    out = {"nmi": nmi(p, truth), "ari": ari(p, truth), "q": modularity(g, p), "k": p.k}
    _emit(json.dumps(out, sort_keys=True) + "\n", None)


def cmd_benchmark(args):
    cfg = ExperimentConfig.from_json(Path(args.config).read_text(encoding="utf-8"))
    if args.workers is not None:
        cfg.workers = args.workers
    res = run_experiment_full(cfg)
    if args.out_json:
        _emit(res.report.to_json(), args.out_json)
    _emit(res.report.to_csv(), args.out_csv)
    if args.timings:
        for (det, method), secs in sorted(res.timings.items()):
            print(f"{det}\t{method}\t{secs:.3f}s", file=sys.stderr)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="robustecd", description="Community detection enhancement by graph rewiring.")
    sub = parser.add_subparsers(dest="command", required=True)

    def graph_args(p, labels=False, seed=True):
        p.add_argument("--graph", required=True, help="edge-list file")
        p.add_argument("--labels", required=labels, help="ground-truth label file")
        if seed:
            p.add_argument("--seed", type=int, required=True)

    def detector_args(p):
        p.add_argument("--detector", default="louvain", help="louvain | lp | fg | walktrap | external")
        p.add_argument("--walk-length", type=int, default=4)
        p.add_argument("--external", help="partition file for the external detector")

    p = sub.add_parser("detect", allow_abbrev=False, help="run a community detector")
    graph_args(p)
    detector_args(p)
    p.add_argument("--out-partition", default="-")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("enhance-ga", allow_abbrev=False, help="genetic rewiring enhancement")
    graph_args(p)
    detector_args(p)
    p.add_argument("--pop", type=int, default=120)
    p.add_argument("--pc", type=float, default=0.8)
    p.add_argument("--pm", type=float, default=0.02)
    p.add_argument("--pe", type=float, default=0.2)
    p.add_argument("--gens", type=int, default=1000)
    p.add_argument("--beta-a", type=float, default=GAConfig.beta_a)
    p.add_argument("--beta-d", type=float, default=GAConfig.beta_d)
    p.add_argument("--out-partition", default="-")
    p.add_argument("--out-graph")
    p.set_defaults(func=cmd_enhance_ga)

    p = sub.add_parser("enhance-se", allow_abbrev=False, help="similarity-ensemble enhancement")
    graph_args(p)
    detector_args(p)
    p.add_argument("--beta-a", type=float, default=SEConfig.beta_a)
    p.add_argument("--samples", type=int, default=10)
    p.add_argument("--indices", default=",".join(KINDS))
    p.add_argument("--threshold-mode", choices=("consensus", "approx"), default="consensus")
    p.add_argument("--smin", type=int, default=3)
    p.add_argument("--out-partition", default="-")
    p.set_defaults(func=cmd_enhance_se)

    p = sub.add_parser("attack", allow_abbrev=False, help="generate an adversarial network")
    graph_args(p)
    p.add_argument("--method", choices=("q", "dm"), default="q")
    p.add_argument("--budget", type=int, required=True)
    p.add_argument("--detector", default="louvain")
    p.add_argument("--target", type=int, help="target community label index for dm")
    p.add_argument("--pop", type=int, default=120)
    p.add_argument("--gens", type=int, default=100)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("extract-sub", allow_abbrev=False, help="degree-weighted ego-network subgraph")
    graph_args(p, labels=True)
    p.add_argument("--x", type=int, required=True)
    p.add_argument("--h", type=int, required=True)
    p.add_argument("--out-prefix", required=True)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("evaluate", allow_abbrev=False, help="score a partition against ground truth")
    graph_args(p, labels=True, seed=False)
    p.add_argument("--partition", required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("benchmark", allow_abbrev=False, help="run a JSON experiment config")
    p.add_argument("--config", required=True)
    p.add_argument("--workers", type=int)
    p.add_argument("--out-csv", default="-")
    p.add_argument("--out-json")
    p.add_argument("--timings", action="store_true", help="print wall-clock per method to stderr")
    p.set_defaults(func=cmd_benchmark)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except (RobustECDError, OSError, ValueError, KeyError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"robustecd: error: {msg}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
