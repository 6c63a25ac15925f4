"""numba-compiled kernels; same contracts as the numpy versions."""

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def half_sq_distances(matrix, rows, query):
    k = rows.shape[0]
    d = query.shape[0]
    out = np.empty(k)
    for i in range(k):
        row = rows[i]
        acc = 0.0
        for j in range(d):
            diff = matrix[row, j] - query[j]
            acc += diff * diff
        out[i] = 0.5 * acc
    return out


@njit(cache=True, nogil=True)
def pagerank_power(n, src, dst, damping, max_iter, tol):
    m = src.shape[0]
    out_deg = np.zeros(n)
    for e in range(m):
        out_deg[src[e]] += 1.0
    x = np.full(n, 1.0 / n)
    new = np.zeros(n)
    residual = np.inf
    it = 0
    for it in range(1, max_iter + 1):
        new[:] = 0.0
        for e in range(m):
            s = src[e]
            new[dst[e]] += x[s] / out_deg[s]
        dangling_mass = 0.0
        for i in range(n):
            if out_deg[i] == 0.0:
                dangling_mass += x[i]
        base = (damping * dangling_mass + (1.0 - damping)) / n
        total = 0.0
        for i in range(n):
            new[i] = damping * new[i] + base
            total += new[i]
        residual = 0.0
        for i in range(n):
            v = new[i] / total
            residual += abs(v - x[i])
            x[i] = v
        if residual < tol:
            break
    return x, it, residual


@njit(cache=True, nogil=True)
def _dominates(objs, violation, a, b):
    va = violation[a]
    vb = violation[b]
    if va <= 0.0 and vb > 0.0:
        return True
    if va > 0.0 and vb <= 0.0:
        return False
    if va > 0.0 and vb > 0.0:
        return va < vb
    better = False
    for k in range(objs.shape[1]):
        if objs[a, k] > objs[b, k]:
            return False
        if objs[a, k] < objs[b, k]:
            better = True
    return better


@njit(cache=True, nogil=True)
def nondominated_ranks(objs, violation):
    n = objs.shape[0]
    dominated_by = np.zeros(n, dtype=np.int64)
    dom = np.zeros((n, n), dtype=np.bool_)
    for a in range(n):
        for b in range(n):
            if a != b and _dominates(objs, violation, a, b):
                dom[a, b] = True
                dominated_by[b] += 1
    ranks = np.full(n, -1, dtype=np.int64)
    rank = 0
    assigned = 0
    while assigned < n:
        front = np.empty(n, dtype=np.int64)
        size = 0
        for i in range(n):
            if ranks[i] < 0 and dominated_by[i] == 0:
                front[size] = i
                size += 1
        for f in range(size):
            ranks[front[f]] = rank
        for f in range(size):
            a = front[f]
            for b in range(n):
                if dom[a, b]:
                    dominated_by[b] -= 1
        assigned += size
        rank += 1
    return ranks


@njit(cache=True, nogil=True)
def crowding_distance(objs, ranks):
    n, m = objs.shape
    dist = np.zeros(n)
    if n == 0:
        return dist
    max_rank = ranks.max()
    for r in range(max_rank + 1):
        count = 0
        for i in range(n):
            if ranks[i] == r:
                count += 1
        if count == 0:
            continue
        idx = np.empty(count, dtype=np.int64)
        c = 0
        for i in range(n):
            if ranks[i] == r:
                idx[c] = i
                c += 1
        if count <= 2:
            for i in range(count):
                dist[idx[i]] = np.inf
            continue
        for k in range(m):
            vals = np.empty(count)
            for i in range(count):
                vals[i] = objs[idx[i], k]
            order = idx[np.argsort(vals, kind="mergesort")]
            lo = objs[order[0], k]
            hi = objs[order[count - 1], k]
            dist[order[0]] = np.inf
            dist[order[count - 1]] = np.inf
            if hi == lo:
                continue
            for i in range(1, count - 1):
                dist[order[i]] += (objs[order[i + 1], k] - objs[order[i - 1], k]) / (hi - lo)
    return dist
