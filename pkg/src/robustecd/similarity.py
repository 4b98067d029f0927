"""Vertex-similarity indices used to guide edge addition.

All indices are returned as sparse symmetric matrices with an empty
diagonal. Local indices are nonzero only on pairs with a common neighbor,
LP only on pairs joined by a path of length 2 or 3.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import ConvergenceError
from .graph import Graph

KINDS = ("cn", "salton", "jaccard", "hpi", "aa", "ra", "lp", "rwr")

_ALIASES = {k: k for k in KINDS}
_ALIASES.update({"common_neighbors": "cn", "adamic_adar": "aa", "resource_allocation": "ra",
                 "local_path": "lp", "random_walk_restart": "rwr"})

DEFAULT_ALPHA = 0.01
DEFAULT_C = 0.85
RWR_TOL = 1e-10
RWR_MAX_ITER = 10_000
RWR_TRUNCATE = 1e-12


def normalize_kind(kind: str) -> str:
    try:
        return _ALIASES[kind.lower()]
    except KeyError:
        raise ValueError(f"unknown similarity index {kind!r}; expected one of {', '.join(KINDS)}") from None


@dataclass(frozen=True)
class SimilarityMatrix:
    kind: str
    matrix: sp.csr_matrix
    params: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def score(self, i, j) -> float:
        return float(self.matrix[i, j])

    def upper(self) -> tuple[np.ndarray, np.ndarray]:
        """Codes ``i*n + j`` (``i < j``) and scores of all positive pairs."""
        coo = sp.triu(self.matrix, k=1).tocoo()
        codes = coo.row.astype(np.int64) * self.n + coo.col
        order = np.argsort(codes)
        return codes[order], coo.data[order]

    def to_dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def to_csv(self) -> str:
        codes, vals = self.upper()
        lines = ["i,j,score"]
        lines += [f"{c // self.n},{c % self.n},{v!r}" for c, v in zip(codes.tolist(), vals.tolist())]
        return "\n".join(lines) + "\n"


def _finish(mat) -> sp.csr_matrix:
    mat = sp.csr_matrix(mat, dtype=np.float64)
    mat.setdiag(0)
    mat.eliminate_zeros()
    mat.sort_indices()
    return mat


def _pair_scale(a2: sp.csr_matrix, fn) -> sp.csr_matrix:
    """Apply ``fn(cn, i, j)`` to every stored entry of ``a2``."""
    coo = a2.tocoo()
    vals = fn(coo.data.astype(np.float64), coo.row, coo.col)
    return sp.csr_matrix((vals, (coo.row, coo.col)), shape=a2.shape)


def compute_similarity(g: Graph, kind: str, alpha: float = DEFAULT_ALPHA, c: float = DEFAULT_C) -> SimilarityMatrix:
    kind = normalize_kind(kind)
    if g.n == 0:
        raise ValueError("similarity of an empty graph")
    a = g.to_sparse()
    k = g.degrees.astype(np.float64)
    if kind == "rwr":
        if not 0.0 < c < 1.0:
            raise ValueError("rwr continue probability must lie in (0, 1)")
        return SimilarityMatrix(kind, _rwr_matrix(g, c), {"c": c})
    if kind == "lp":
        if alpha < 0:
            raise ValueError("lp alpha must be nonnegative")
        a2 = a @ a
        mat = a2 + alpha * (a2 @ a) if alpha else a2
        return SimilarityMatrix(kind, _finish(mat), {"alpha": alpha})
    if kind in ("aa", "ra"):
        w = np.zeros(g.n)
        if kind == "aa":
            # a common neighbor has degree >= 2, so log k > 0 wherever it matters
            ok = k > 1
            w[ok] = 1.0 / np.log(k[ok])
        else:
            ok = k > 0
            w[ok] = 1.0 / k[ok]
        mat = a @ sp.diags(w) @ a
        return SimilarityMatrix(kind, _finish(mat), {})

    a2 = _finish(a @ a)
    if kind == "cn":
        return SimilarityMatrix(kind, a2, {})
    if kind == "salton":
        fn = lambda cn, i, j: cn / np.sqrt(k[i] * k[j])
    elif kind == "jaccard":
        fn = lambda cn, i, j: cn / (k[i] + k[j] - cn)
    else:
        fn = lambda cn, i, j: cn / np.minimum(k[i], k[j])
    # entries exist only where cn > 0, hence both degrees are positive
    return SimilarityMatrix(kind, _finish(_pair_scale(a2, fn)), {})


def _transition_t(g: Graph) -> sp.csr_matrix:
    """``P^T`` with ``P_ij = 1/k_i`` on edges."""
    k = g.degrees.astype(np.float64)
    inv = np.zeros(g.n)
    inv[k > 0] = 1.0 / k[k > 0]
    p = sp.diags(inv) @ g.to_sparse()
    return sp.csr_matrix(p.T)


def _rwr_block(pt, sources, c, tol, max_iter):
    n = pt.shape[0]
    e = np.zeros((n, len(sources)))
    e[sources, np.arange(len(sources))] = 1.0
    q = e.copy()
    restart = (1.0 - c) * e
    for _ in range(max_iter):
        nxt = c * (pt @ q) + restart
        res = np.abs(nxt - q).sum(axis=0)
        q = nxt
        if res.max() < tol:
            return q, res
    raise ConvergenceError(
        f"random walk with restart did not converge in {max_iter} iterations", residual=float(res.max())
    )


def rwr_distribution(g: Graph, source: int, c: float = DEFAULT_C, tol: float = RWR_TOL,
                     max_iter: int = RWR_MAX_ITER) -> np.ndarray:
    """Stationary restart-walk distribution from ``source``."""
    if not 0.0 < c < 1.0:
        raise ValueError("rwr continue probability must lie in (0, 1)")
    if g.degrees[source] == 0:
        warnings.warn(f"vertex {source} is isolated; returning its indicator vector", stacklevel=2)
        out = np.zeros(g.n)
        out[source] = 1.0
        return out
    q, _ = _rwr_block(_transition_t(g), [source], c, tol, max_iter)
    return q[:, 0]


def _rwr_matrix(g: Graph, c: float, tol=RWR_TOL, max_iter=RWR_MAX_ITER, block=512) -> sp.csr_matrix:
    pt = _transition_t(g)
    sources = np.flatnonzero(g.degrees > 0)
    rows, cols, vals = [], [], []
    for start in range(0, len(sources), block):
        src = sources[start:start + block]
        q, _ = _rwr_block(pt, src, c, tol, max_iter)
        r, col = np.nonzero(q >= RWR_TRUNCATE)
        # q[:, b] is the distribution of walker src[b]; store as row src[b]
        rows.append(src[col])
        cols.append(r)
        vals.append(q[r, col])
    if rows:
        qm = sp.csr_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(g.n, g.n)
        )
    else:
        qm = sp.csr_matrix((g.n, g.n))
    return _finish(qm + qm.T)


def compute_all(g: Graph, kinds=KINDS, alpha: float = DEFAULT_ALPHA, c: float = DEFAULT_C) -> list[SimilarityMatrix]:
    return [compute_similarity(g, kd, alpha=alpha, c=c) for kd in kinds]
