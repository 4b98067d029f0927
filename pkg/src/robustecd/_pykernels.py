"""Pure-Python community detection kernels.

These are the reference implementations of the compiled kernels in
``_ckernels.pyx``. Both consume the same integer PRNG stream and use exact
integer arithmetic for every modularity comparison, so for a given seed the
two backends return identical labelings.

All kernels take an unweighted, symmetric CSR adjacency (``indptr``,
``indices``) without self-loops.
"""

import numpy as np

_MASK = (1 << 64) - 1


class SplitMix64:
    __slots__ = ("state",)

    def __init__(self, seed):
        self.state = seed & _MASK

    def next(self):
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def below(self, k):
        # multiply-shift on the high 32 bits; k < 2**32
        return ((self.next() >> 32) * k) >> 32

    def shuffle(self, seq):
        for i in range(len(seq) - 1, 0, -1):
            j = self.below(i + 1)
            seq[i], seq[j] = seq[j], seq[i]


def _normalize(labels):
    seen = {}
    out = np.empty(len(labels), dtype=np.int64)
    for i, c in enumerate(labels):
        if c not in seen:
            seen[c] = len(seen)
        out[i] = seen[c]
    return out


def louvain(n, indptr, indices, seed, max_passes=1000):
    """Multi-level Louvain modularity optimisation.

    Returns ``(labels, history)`` where ``history`` holds the modularity of
    the singleton partition followed by the modularity after every level.
    """
    rng = SplitMix64(seed)
    ptr = [int(x) for x in indptr]
    adj = [int(x) for x in indices]
    w = [1] * len(adj)
    selfw = [0] * n
    N = n
    k = [ptr[i + 1] - ptr[i] for i in range(N)]
    two_m = sum(k)
    node_comm = list(range(n))
    if two_m == 0:
        return np.arange(n, dtype=np.int64), np.zeros(1)

    def quality():
        # singleton partition of the current (aggregated) graph
        tm = float(two_m)
        q = 0.0
        for i in range(N):
            q += selfw[i] / tm - (k[i] / tm) * (k[i] / tm)
        return q

    history = [quality()]
    nw = [-1] * N
    while True:
        comm = list(range(N))
        tot = list(k)
        order = list(range(N))
        rng.shuffle(order)
        moved_any = False
        passes = 0
        while True:
            passes += 1
            if passes > max_passes:
                raise RuntimeError("louvain: local-move pass cap exceeded")
            moved = False
            for i in order:
                ci = comm[i]
                touched = []
                for p in range(ptr[i], ptr[i + 1]):
                    c = comm[adj[p]]
                    if nw[c] < 0:
                        nw[c] = 0
                        touched.append(c)
                    nw[c] += w[p]
                ki = k[i]
                tot[ci] -= ki
                own = nw[ci] if nw[ci] > 0 else 0
                best = ci
                best_gain = own * two_m - ki * tot[ci]
                for c in touched:
                    gain = nw[c] * two_m - ki * tot[c]
                    if gain > best_gain:
                        best = c
                        best_gain = gain
                tot[best] += ki
                comm[i] = best
                if best != ci:
                    moved = True
                for c in touched:
                    nw[c] = -1
            if not moved:
                break
            moved_any = True
        if not moved_any:
            break

        # renumber communities by first appearance over node order
        remap = {}
        for i in range(N):
            c = comm[i]
            if c not in remap:
                remap[c] = len(remap)
            comm[i] = remap[c]
        newN = len(remap)
        for v in range(n):
            node_comm[v] = comm[node_comm[v]]

        members = [[] for _ in range(newN)]
        for i in range(N):
            members[comm[i]].append(i)
        new_ptr = [0]
        new_adj = []
        new_w = []
        new_self = [0] * newN
        new_k = [0] * newN
        acc = [-1] * newN
        for c in range(newN):
            touched = []
            s = 0
            for i in members[c]:
                s += selfw[i]
                new_k[c] += k[i]
                for p in range(ptr[i], ptr[i + 1]):
                    d = comm[adj[p]]
                    if d == c:
                        s += w[p]
                        continue
                    if acc[d] < 0:
                        acc[d] = 0
                        touched.append(d)
                    acc[d] += w[p]
            new_self[c] = s
            for d in touched:
                new_adj.append(d)
                new_w.append(acc[d])
                acc[d] = -1
            new_ptr.append(len(new_adj))
        ptr, adj, w, selfw, k, N = new_ptr, new_adj, new_w, new_self, new_k, newN
        nw = [-1] * N
        history.append(quality())
        if N == 1:
            break
    return _normalize(node_comm), np.asarray(history, dtype=np.float64)


def label_propagation(n, indptr, indices, seed, max_sweeps=100):
    """Asynchronous label propagation with uniform random tie breaking.

    Returns ``(labels, sweeps, converged)``.
    """
    rng = SplitMix64(seed)
    ptr = [int(x) for x in indptr]
    adj = [int(x) for x in indices]
    labels = list(range(n))
    count = [0] * n
    order = list(range(n))
    sweeps = 0
    converged = False
    while sweeps < max_sweeps:
        sweeps += 1
        rng.shuffle(order)
        for i in order:
            if ptr[i] == ptr[i + 1]:
                continue
            touched = []
            best = 0
            for p in range(ptr[i], ptr[i + 1]):
                c = labels[adj[p]]
                if count[c] == 0:
                    touched.append(c)
                count[c] += 1
                if count[c] > best:
                    best = count[c]
            cands = [c for c in touched if count[c] == best]
            if len(cands) == 1:
                labels[i] = cands[0]
            else:
                labels[i] = cands[rng.below(len(cands))]
            for c in touched:
                count[c] = 0
        if _lp_stable(n, ptr, adj, labels, count):
            converged = True
            break
    return _normalize(labels), sweeps, converged


def _lp_stable(n, ptr, adj, labels, count):
    for i in range(n):
        if ptr[i] == ptr[i + 1]:
            continue
        touched = []
        best = 0
        for p in range(ptr[i], ptr[i + 1]):
            c = labels[adj[p]]
            if count[c] == 0:
                touched.append(c)
            count[c] += 1
            if count[c] > best:
                best = count[c]
        ok = count[labels[i]] == best
        for c in touched:
            count[c] = 0
        if not ok:
            return False
    return True


def greedy_modularity(n, indptr, indices):
    """Clauset-Newman-Moore agglomeration, cut at the modularity maximum.

    Merge keys ``e_ij * 2m - a_i * a_j`` are integers, so ties are exact and
    resolved by the lexicographically smallest community pair. Returns
    ``(labels, history)`` with the scaled modularity after each merge.
    """
    ptr = [int(x) for x in indptr]
    adj = [int(x) for x in indices]
    links = [dict() for _ in range(n)]
    a = [ptr[i + 1] - ptr[i] for i in range(n)]
    for i in range(n):
        row = links[i]
        for p in range(ptr[i], ptr[i + 1]):
            j = adj[p]
            row[j] = row.get(j, 0) + 1
    two_m = sum(a)
    if two_m == 0:
        return np.arange(n, dtype=np.int64), np.zeros(1)
    qn = -sum(x * x for x in a)
    history = [qn]
    best_q = qn
    best_step = 0
    merges = []
    alive = list(range(n))
    while True:
        bi = bj = -1
        bkey = 0
        for i in alive:
            ai = a[i]
            for j, e in links[i].items():
                if j <= i:
                    continue
                key = e * two_m - ai * a[j]
                if bi < 0 or key > bkey or (key == bkey and (i < bi or (i == bi and j < bj))):
                    bi, bj, bkey = i, j, key
        if bi < 0:
            break
        row_i = links[bi]
        for kk, e in links[bj].items():
            if kk == bi:
                continue
            row_i[kk] = row_i.get(kk, 0) + e
            row_k = links[kk]
            row_k[bi] = row_k.get(bi, 0) + e
            del row_k[bj]
        del row_i[bj]
        links[bj] = {}
        a[bi] += a[bj]
        a[bj] = 0
        alive.remove(bj)
        merges.append((bi, bj))
        qn += 2 * bkey
        history.append(qn)
        if qn > best_q:
            best_q = qn
            best_step = len(merges)
    labels = list(range(n))
    for i, j in merges[:best_step]:
        for v in range(n):
            if labels[v] == j:
                labels[v] = i
    scale = float(two_m) * float(two_m)
    return _normalize(labels), np.asarray(history, dtype=np.float64) / scale


def components(n, indptr, indices):
    """Connected-component labels numbered by smallest contained vertex."""
    ptr = indptr.tolist() if hasattr(indptr, "tolist") else list(indptr)
    adj = indices.tolist() if hasattr(indices, "tolist") else list(indices)
    lab = [-1] * n
    c = 0
    for s in range(n):
        if lab[s] >= 0:
            continue
        lab[s] = c
        stack = [s]
        while stack:
            u = stack.pop()
            for p in range(ptr[u], ptr[u + 1]):
                v = adj[p]
                if lab[v] < 0:
                    lab[v] = c
                    stack.append(v)
        c += 1
    return np.asarray(lab, dtype=np.int64)
