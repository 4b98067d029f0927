"""Partition quality and agreement metrics, plus report aggregation."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np
from scipy.special import comb

from .errors import UndefinedMetricError
from .graph import Graph, Partition


def _labels(p) -> np.ndarray:
    return p.labels if isinstance(p, Partition) else Partition(p).labels


def modularity(g: Graph, p) -> float:
    """Newman modularity of partition ``p`` on ``g``."""
    lab = _labels(p)
    if lab.shape[0] != g.n:
        raise ValueError("partition does not cover the graph's vertices")
    if g.m == 0:
        raise UndefinedMetricError("modularity is undefined on a graph without edges")
    two_m = 2.0 * g.m
    e = g.edges
    intra = np.count_nonzero(lab[e[:, 0]] == lab[e[:, 1]])
    tot = np.bincount(lab, weights=g.degrees.astype(np.float64))
    return float(2.0 * intra / two_m - np.sum((tot / two_m) ** 2))


def contingency(x, y) -> np.ndarray:
    a, b = _labels(x), _labels(y)
    if a.shape != b.shape:
        raise ValueError("partitions are over different vertex sets")
    ka = int(a.max()) + 1 if a.size else 0
    kb = int(b.max()) + 1 if b.size else 0
    return np.bincount(a * kb + b, minlength=ka * kb).reshape(ka, kb)


def _entropy(counts, n) -> float:
    p = counts[counts > 0] / n
    return float(-np.sum(p * np.log(p)))


def nmi(x, y) -> float:
    """Normalized mutual information ``2 I(X;Y) / (H(X) + H(Y))``.

    Returns 1.0 when both partitions consist of a single block.
    """
    a, b = _labels(x), _labels(y)
    if a.size and np.array_equal(a, b):
        return 1.0
    c = contingency(a, b).astype(np.float64)
    n = c.sum()
    if n == 0:
        raise UndefinedMetricError("nmi of empty partitions")
    hx = _entropy(c.sum(axis=1), n)
    hy = _entropy(c.sum(axis=0), n)
    if hx + hy == 0.0:
        return 1.0
    rows, cols = np.nonzero(c)
    nij = c[rows, cols]
    pi = c.sum(axis=1)[rows]
    pj = c.sum(axis=0)[cols]
    mi = float(np.sum(nij / n * np.log(nij * n / (pi * pj))))
    return min(1.0, max(0.0, 2.0 * mi / (hx + hy)))


def ari(x, y) -> float:
    """Adjusted Rand index via the contingency-table form."""
    a, b = _labels(x), _labels(y)
    if a.shape[0] < 2:
        raise UndefinedMetricError("ari needs at least two vertices")
    if np.array_equal(a, b):
        return 1.0
    c = contingency(a, b)
    n = int(c.sum())
    sum_ij = float(comb(c, 2).sum())
    sum_a = float(comb(c.sum(axis=1), 2).sum())
    sum_b = float(comb(c.sum(axis=0), 2).sum())
    total = float(comb(n, 2))
    expected = sum_a * sum_b / total
    top = 0.5 * (sum_a + sum_b)
    if top == expected:
        # both partitions trivial in the same way; they agree on every pair
        return 1.0
    return (sum_ij - expected) / (top - expected)


def rimp(met_ori: float, met_en: float) -> float:
    """Relative improvement of ``met_en`` over ``met_ori``."""
    if met_ori < 0:
        raise ValueError("original metric must be nonnegative")
    if met_ori == 0:
        return met_en - met_ori
    return (met_en - met_ori) / met_ori


METRICS = ("nmi", "ari", "q")


@dataclass
class MetricRow:
    dataset: str
    detector: str
    method: str
    metric: str
    values: list
    rimp: float | None = None

    @property
    def mean(self) -> float:
        return float(np.mean(self.values)) if self.values else float("nan")

    @property
    def std(self) -> float:
        # population form, divides by the trial count
        return float(np.std(self.values)) if self.values else float("nan")


@dataclass
class MetricsReport:
    """Per-trial metric values with mean, std and RIMP against a reference."""

    rows: list = field(default_factory=list)
    failures: list = field(default_factory=list)

    def add(self, dataset, detector, method, metric, values, reference=None):
        row = MetricRow(dataset, detector, method, metric, [float(v) for v in values])
        if reference is not None and reference.values:
            # negative references (possible for ari, q) have no defined rate
            row.rimp = rimp(reference.mean, row.mean) if reference.mean >= 0 else None
        self.rows.append(row)
        return row

    def get(self, detector, method, metric) -> MetricRow:
        for r in self.rows:
            if (r.detector, r.method, r.metric) == (detector, method, metric):
                return r
        raise KeyError((detector, method, metric))

    def avg_rimp(self, method, metric) -> float | None:
        vals = [r.rimp for r in self.rows if r.method == method and r.metric == metric and r.rimp is not None]
        return float(np.mean(vals)) if vals else None

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["dataset", "detector", "method", "metric", "mean", "std", "rimp"])
        for r in self.rows:
            w.writerow([
                r.dataset, r.detector, r.method, r.metric,
                f"{r.mean:.3f}", f"{r.std:.3f}",
                "" if r.rimp is None else f"{r.rimp:.3f}",
            ])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "rows": [
                {
                    "dataset": r.dataset, "detector": r.detector, "method": r.method,
                    "metric": r.metric, "mean": r.mean, "std": r.std, "rimp": r.rimp,
                    "values": r.values,
                }
                for r in self.rows
            ],
            "failures": list(self.failures),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"
