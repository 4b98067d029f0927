# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
# distutils: language = c++
"""Compiled community detection kernels.

Mirror of ``_pykernels``: same PRNG stream, same integer comparisons, same
tie rules, hence identical labelings for identical seeds.
"""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport uint64_t, int64_t
from libcpp.vector cimport vector
from libcpp.unordered_map cimport unordered_map
from cython.operator cimport dereference as deref, preincrement as inc

cnp.import_array()


cdef inline uint64_t _next(uint64_t* state) noexcept nogil:
    state[0] += <uint64_t>0x9E3779B97F4A7C15
    cdef uint64_t z = state[0]
    z = (z ^ (z >> 30)) * <uint64_t>0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * <uint64_t>0x94D049BB133111EB
    return z ^ (z >> 31)


cdef inline int64_t _below(uint64_t* state, int64_t k) noexcept nogil:
    return <int64_t>(((_next(state) >> 32) * <uint64_t>k) >> 32)


cdef void _shuffle(uint64_t* state, int64_t[::1] seq) noexcept nogil:
    cdef Py_ssize_t i
    cdef int64_t j, tmp
    for i in range(seq.shape[0] - 1, 0, -1):
        j = _below(state, i + 1)
        tmp = seq[i]
        seq[i] = seq[j]
        seq[j] = tmp


cdef cnp.ndarray _normalize(int64_t[::1] labels, Py_ssize_t n):
    cdef cnp.ndarray[int64_t, ndim=1] out = np.empty(n, dtype=np.int64)
    cdef cnp.ndarray[int64_t, ndim=1] remap = np.full(max(n, 1), -1, dtype=np.int64)
    cdef Py_ssize_t i
    cdef int64_t nxt = 0, c
    for i in range(n):
        c = labels[i]
        if remap[c] < 0:
            remap[c] = nxt
            nxt += 1
        out[i] = remap[c]
    return out


cdef double _quality(Py_ssize_t N, int64_t[::1] ptr, int64_t[::1] adj, int64_t[::1] w,
                     int64_t[::1] selfw, int64_t[::1] k, int64_t two_m):
    # singleton partition of the current (aggregated) graph
    cdef double q = 0.0, tm = <double>two_m
    cdef Py_ssize_t i
    for i in range(N):
        q += selfw[i] / tm - (k[i] / tm) * (k[i] / tm)
    return q


def louvain(Py_ssize_t n, indptr, indices, uint64_t seed, int64_t max_passes=1000):
    cdef uint64_t state = seed
    cdef int64_t[::1] ptr = np.array(indptr, dtype=np.int64)
    cdef int64_t[::1] adj = np.array(indices, dtype=np.int64)
    cdef int64_t[::1] w = np.ones(adj.shape[0], dtype=np.int64)
    cdef int64_t[::1] selfw = np.zeros(n, dtype=np.int64)
    cdef int64_t[::1] k = np.empty(n, dtype=np.int64)
    cdef int64_t[::1] node_comm = np.arange(n, dtype=np.int64)
    cdef Py_ssize_t N = n, i, p, c, d, v, newN, ntouched, t, passes, pos
    cdef int64_t two_m = 0, ki, best, ci, own, gain, best_gain, s
    cdef bint moved, moved_any
    for i in range(N):
        k[i] = ptr[i + 1] - ptr[i]
        two_m += k[i]
    if two_m == 0:
        return np.arange(n, dtype=np.int64), np.zeros(1)

    history = [_quality(N, ptr, adj, w, selfw, k, two_m)]
    cdef int64_t[::1] comm, tot, order, nw, touched, remap, counts, start, members, acc
    cdef int64_t[::1] new_ptr, new_adj, new_w, new_self, new_k
    while True:
        comm = np.arange(N, dtype=np.int64)
        tot = np.array(k, dtype=np.int64)
        order = np.arange(N, dtype=np.int64)
        nw = np.full(N, -1, dtype=np.int64)
        touched = np.empty(N, dtype=np.int64)
        _shuffle(&state, order)
        moved_any = False
        passes = 0
        while True:
            passes += 1
            if passes > max_passes:
                raise RuntimeError("louvain: local-move pass cap exceeded")
            moved = False
            for t in range(N):
                i = order[t]
                ci = comm[i]
                ntouched = 0
                for p in range(ptr[i], ptr[i + 1]):
                    c = comm[adj[p]]
                    if nw[c] < 0:
                        nw[c] = 0
                        touched[ntouched] = c
                        ntouched += 1
                    nw[c] += w[p]
                ki = k[i]
                tot[ci] -= ki
                own = nw[ci] if nw[ci] > 0 else 0
                best = ci
                best_gain = own * two_m - ki * tot[ci]
                for p in range(ntouched):
                    c = touched[p]
                    gain = nw[c] * two_m - ki * tot[c]
                    if gain > best_gain:
                        best = c
                        best_gain = gain
                tot[best] += ki
                comm[i] = best
                if best != ci:
                    moved = True
                for p in range(ntouched):
                    nw[touched[p]] = -1
            if not moved:
                break
            moved_any = True
        if not moved_any:
            break

        remap = np.full(N, -1, dtype=np.int64)
        newN = 0
        for i in range(N):
            c = comm[i]
            if remap[c] < 0:
                remap[c] = newN
                newN += 1
            comm[i] = remap[c]
        for v in range(n):
            node_comm[v] = comm[node_comm[v]]

        # counting sort of nodes by community, stable in node order
        counts = np.zeros(newN + 1, dtype=np.int64)
        for i in range(N):
            counts[comm[i] + 1] += 1
        for c in range(newN):
            counts[c + 1] += counts[c]
        start = np.array(counts, dtype=np.int64)
        members = np.empty(N, dtype=np.int64)
        for i in range(N):
            members[start[comm[i]]] = i
            start[comm[i]] += 1

        new_ptr = np.zeros(newN + 1, dtype=np.int64)
        new_adj = np.empty(adj.shape[0], dtype=np.int64)
        new_w = np.empty(adj.shape[0], dtype=np.int64)
        new_self = np.zeros(newN, dtype=np.int64)
        new_k = np.zeros(newN, dtype=np.int64)
        acc = np.full(newN, -1, dtype=np.int64)
        pos = 0
        for c in range(newN):
            ntouched = 0
            s = 0
            for t in range(counts[c], counts[c + 1]):
                i = members[t]
                s += selfw[i]
                new_k[c] += k[i]
                for p in range(ptr[i], ptr[i + 1]):
                    d = comm[adj[p]]
                    if d == c:
                        s += w[p]
                        continue
                    if acc[d] < 0:
                        acc[d] = 0
                        touched[ntouched] = d
                        ntouched += 1
                    acc[d] += w[p]
            new_self[c] = s
            for t in range(ntouched):
                d = touched[t]
                new_adj[pos] = d
                new_w[pos] = acc[d]
                acc[d] = -1
                pos += 1
            new_ptr[c + 1] = pos
        ptr = new_ptr
        adj = new_adj[:pos]
        w = new_w[:pos]
        selfw = new_self
        k = new_k
        N = newN
        history.append(_quality(N, ptr, adj, w, selfw, k, two_m))
        if N == 1:
            break
    return _normalize(node_comm, n), np.asarray(history, dtype=np.float64)


cdef bint _lp_stable(Py_ssize_t n, int64_t[::1] ptr, int64_t[::1] adj, int64_t[::1] labels,
                     int64_t[::1] count, int64_t[::1] touched) noexcept nogil:
    cdef Py_ssize_t i, p, nt, t
    cdef int64_t c, best
    cdef bint ok
    for i in range(n):
        if ptr[i] == ptr[i + 1]:
            continue
        nt = 0
        best = 0
        for p in range(ptr[i], ptr[i + 1]):
            c = labels[adj[p]]
            if count[c] == 0:
                touched[nt] = c
                nt += 1
            count[c] += 1
            if count[c] > best:
                best = count[c]
        ok = count[labels[i]] == best
        for t in range(nt):
            count[touched[t]] = 0
        if not ok:
            return False
    return True


def label_propagation(Py_ssize_t n, indptr, indices, uint64_t seed, int64_t max_sweeps=100):
    cdef uint64_t state = seed
    cdef int64_t[::1] ptr = np.array(indptr, dtype=np.int64)
    cdef int64_t[::1] adj = np.array(indices, dtype=np.int64)
    cdef int64_t[::1] labels = np.arange(n, dtype=np.int64)
    cdef int64_t[::1] count = np.zeros(max(n, 1), dtype=np.int64)
    cdef int64_t[::1] touched = np.empty(max(n, 1), dtype=np.int64)
    cdef int64_t[::1] cands = np.empty(max(n, 1), dtype=np.int64)
    cdef int64_t[::1] order = np.arange(n, dtype=np.int64)
    cdef Py_ssize_t i, p, t, nt, nc
    cdef int64_t c, best, sweeps = 0
    cdef bint converged = False
    while sweeps < max_sweeps:
        sweeps += 1
        _shuffle(&state, order)
        for t in range(n):
            i = order[t]
            if ptr[i] == ptr[i + 1]:
                continue
            nt = 0
            best = 0
            for p in range(ptr[i], ptr[i + 1]):
                c = labels[adj[p]]
                if count[c] == 0:
                    touched[nt] = c
                    nt += 1
                count[c] += 1
                if count[c] > best:
                    best = count[c]
            nc = 0
            for p in range(nt):
                if count[touched[p]] == best:
                    cands[nc] = touched[p]
                    nc += 1
            if nc == 1:
                labels[i] = cands[0]
            else:
                labels[i] = cands[_below(&state, nc)]
            for p in range(nt):
                count[touched[p]] = 0
        if _lp_stable(n, ptr, adj, labels, count, touched):
            converged = True
            break
    return _normalize(labels, n), int(sweeps), bool(converged)


def greedy_modularity(Py_ssize_t n, indptr, indices):
    cdef int64_t[::1] ptr = np.array(indptr, dtype=np.int64)
    cdef int64_t[::1] adj = np.array(indices, dtype=np.int64)
    cdef vector[unordered_map[int64_t, int64_t]] links
    links.resize(n)
    cdef int64_t[::1] a = np.zeros(max(n, 1), dtype=np.int64)
    cdef char[::1] alive = np.ones(max(n, 1), dtype=np.int8)
    cdef Py_ssize_t i, p
    cdef int64_t j, kk, e, key, bkey = 0, bi, bj, two_m = 0, qn = 0, best_q
    cdef Py_ssize_t best_step = 0, nmerges = 0
    cdef unordered_map[int64_t, int64_t].iterator it
    for i in range(n):
        a[i] = ptr[i + 1] - ptr[i]
        two_m += a[i]
        for p in range(ptr[i], ptr[i + 1]):
            links[i][adj[p]] += 1
    if two_m == 0:
        return np.arange(n, dtype=np.int64), np.zeros(1)
    for i in range(n):
        qn -= a[i] * a[i]
    history = [qn]
    best_q = qn
    cdef vector[int64_t] mi, mj
    while True:
        bi = -1
        bj = -1
        for i in range(n):
            if not alive[i]:
                continue
            it = links[i].begin()
            while it != links[i].end():
                j = deref(it).first
                if j > i:
                    key = deref(it).second * two_m - a[i] * a[j]
                    if bi < 0 or key > bkey or (key == bkey and (i < bi or (i == bi and j < bj))):
                        bi = i
                        bj = j
                        bkey = key
                inc(it)
        if bi < 0:
            break
        it = links[bj].begin()
        while it != links[bj].end():
            kk = deref(it).first
            e = deref(it).second
            if kk != bi:
                links[bi][kk] += e
                links[kk][bi] += e
                links[kk].erase(bj)
            inc(it)
        links[bi].erase(bj)
        links[bj].clear()
        a[bi] += a[bj]
        a[bj] = 0
        alive[bj] = 0
        mi.push_back(bi)
        mj.push_back(bj)
        nmerges += 1
        qn += 2 * bkey
        history.append(qn)
        if qn > best_q:
            best_q = qn
            best_step = nmerges
    cdef int64_t[::1] labels = np.arange(n, dtype=np.int64)
    cdef int64_t[::1] parent = np.arange(n, dtype=np.int64)
    cdef Py_ssize_t s
    for s in range(best_step):
        parent[mj[s]] = mi[s]
    for i in range(n):
        j = i
        while parent[j] != j:
            j = parent[j]
        labels[i] = j
    scale = float(two_m) * float(two_m)
    return _normalize(labels, n), np.asarray(history, dtype=np.float64) / scale


def components(Py_ssize_t n, indptr, indices):
    """Connected-component labels numbered by smallest contained vertex."""
    cdef int64_t[::1] ptr = np.array(indptr, dtype=np.int64)
    cdef int64_t[::1] adj = np.array(indices, dtype=np.int64)
    out = np.full(n, -1, dtype=np.int64)
    cdef int64_t[::1] lab = out
    cdef vector[int64_t] stack
    cdef Py_ssize_t s, p
    cdef int64_t u, v, c = 0
    for s in range(n):
        if lab[s] >= 0:
            continue
        lab[s] = c
        stack.push_back(s)
        while stack.size():
            u = stack.back()
            stack.pop_back()
            for p in range(ptr[u], ptr[u + 1]):
                v = adj[p]
                if lab[v] < 0:
                    lab[v] = c
                    stack.push_back(v)
        c += 1
    return out
