"""Time the compiled and pure-Python detection kernels side by side.

    python benchmarks/bench_kernels.py [--repeat 5] [--n 2000]

Runs each kernel on karate and on a planted-partition graph, checks that the
two backends return identical labels, and prints median wall-clock times.
"""

import argparse
import statistics
import time
from importlib.resources import files

import numpy as np

from robustecd._kernels import get_backend
from robustecd.graph import Graph, read_edge_list


def planted(n, k, p_in, p_out, seed):
    rng = np.random.default_rng(seed)
    block = np.arange(n) % k
    i, j = np.triu_indices(n, 1)
    p = np.where(block[i] == block[j], p_in, p_out)
    keep = rng.random(i.shape[0]) < p
    return Graph.from_edges(n, np.column_stack([i[keep], j[keep]]))


def timed(fn, repeat):
    out, times = None, []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return out, statistics.median(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--n", type=int, default=2000, help="vertices in the planted graph")
    args = ap.parse_args()

    try:
        cy = get_backend("cython")
    except ImportError:
        raise SystemExit("compiled kernels are not built; run `pip install -e . --no-build-isolation`")
    py = get_backend("python")

    graphs = {
        "karate": read_edge_list(files("robustecd") / "data" / "karate.edges"),
        f"planted n={args.n}": planted(args.n, 10, 20 / args.n * 10, 2 / args.n, 0),
    }
    kernels = {
        "louvain": lambda b, g: b.louvain(g.n, g.indptr, g.indices, 1)[0],
        "label_propagation": lambda b, g: b.label_propagation(g.n, g.indptr, g.indices, 1, 100)[0],
        "greedy_modularity": lambda b, g: b.greedy_modularity(g.n, g.indptr, g.indices)[0],
        "components": lambda b, g: b.components(g.n, g.indptr, g.indices),
    }
    print(f"{'graph':<20}{'kernel':<20}{'cython':>12}{'python':>12}{'speedup':>10}  same")
    for gname, g in graphs.items():
        for kname, run in kernels.items():
            # the pure-Python CNM is quadratic in merges; keep large runs to one repeat
            rep = 1 if kname == "greedy_modularity" and g.n > 500 else args.repeat
            a, t_cy = timed(lambda: run(cy, g), args.repeat)
            b, t_py = timed(lambda: run(py, g), rep)
            same = "yes" if np.array_equal(a, b) else "NO"
            print(f"{gname:<20}{kname:<20}{t_cy * 1e3:>10.2f}ms{t_py * 1e3:>10.2f}ms{t_py / t_cy:>9.1f}x  {same}")


if __name__ == "__main__":
    main()
