"""Pure-numpy reference versions of the hot kernels."""

import numpy as np


def half_sq_distances(matrix, rows, query):
    # 0.5 * ||a - b||^2 equals cosine distance for unit vectors and is exactly
    # zero for identical inputs
    diff = matrix[rows] - query
    return 0.5 * np.einsum("ij,ij->i", diff, diff)


def pagerank_power(n, src, dst, damping, max_iter, tol):
    out_deg = np.bincount(src, minlength=n).astype(np.float64)
    dangling = out_deg == 0
    weights = np.zeros(len(src))
    if len(src):
        weights = 1.0 / out_deg[src]
    x = np.full(n, 1.0 / n)
    residual = np.inf
    it = 0
    for it in range(1, max_iter + 1):
        new = np.zeros(n)
        np.add.at(new, dst, x[src] * weights)
        dangling_mass = x[dangling].sum()
        new = damping * new + (damping * dangling_mass + (1.0 - damping)) / n
        new /= new.sum()
        residual = np.abs(new - x).sum()
        x = new
        if residual < tol:
            break
    return x, it, residual


def nondominated_ranks(objs, violation):
    """Front index per individual under constraint-domination (minimization)."""
    n = objs.shape[0]
    if n == 0:
        return np.zeros(0, dtype=np.int64)
    a = objs[:, None, :]
    b = objs[None, :, :]
    obj_dom = np.all(a <= b, axis=2) & np.any(a < b, axis=2)
    va = violation[:, None]
    vb = violation[None, :]
    feas_a = va <= 0
    feas_b = vb <= 0
    dom = np.where(
        feas_a & feas_b,
        obj_dom,
        np.where(feas_a & ~feas_b, True, np.where(~feas_a & ~feas_b, va < vb, False)),
    )
    np.fill_diagonal(dom, False)
    dominated_by = dom.sum(axis=0)
    ranks = np.full(n, -1, dtype=np.int64)
    current = np.flatnonzero(dominated_by == 0)
    rank = 0
    while current.size:
        ranks[current] = rank
        dominated_by = dominated_by - dom[current].sum(axis=0)
        dominated_by[ranks >= 0] = -1
        current = np.flatnonzero(dominated_by == 0)
        rank += 1
    return ranks


def crowding_distance(objs, ranks):
    n, m = objs.shape
    dist = np.zeros(n)
    for r in np.unique(ranks):
        idx = np.flatnonzero(ranks == r)
        if idx.size <= 2:
            dist[idx] = np.inf
            continue
        for k in range(m):
            vals = objs[idx, k]
            order = idx[np.argsort(vals, kind="stable")]
            lo = objs[order[0], k]
            hi = objs[order[-1], k]
            dist[order[0]] = np.inf
            dist[order[-1]] = np.inf
            if hi == lo:
                continue
            gaps = (objs[order[2:], k] - objs[order[:-2], k]) / (hi - lo)
            dist[order[1:-1]] += gaps
    return dist
