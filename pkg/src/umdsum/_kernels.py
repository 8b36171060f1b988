"""Compiled inner loops for the searches.

All arithmetic is on int64 matrix entries at a common power-of-two scale, so
every comparison is exact. ``E[i, j]`` is the scaled entry of row i, column j.
"""

from __future__ import annotations

import numba as nb
import numpy as np


@nb.njit(cache=True, nogil=True)
def prefix_tables(E, order, P, L, R):
    """P: prefix sums per row in rank order; L / R: running max of |P| from the left / right."""
    N = order.shape[0]
    for i in range(N):
        s = 0
        m = 0
        for r in range(N):
            s += E[i, order[r]]
            P[i, r] = s
            a = s if s >= 0 else -s
            if a > m:
                m = a
            L[i, r] = m
        m = 0
        for r in range(N - 1, -1, -1):
            a = P[i, r] if P[i, r] >= 0 else -P[i, r]
            if a > m:
                m = a
            R[i, r] = m


@nb.njit(cache=True, nogil=True)
def gamma_value(E, P, L, R, h, k, y):
    """Total of row suprema after moving the element at rank k (= y) to rank h + 1."""
    N = P.shape[0]
    tot = 0
    for i in range(N):
        m = L[i, h]
        if k + 1 < N and R[i, k + 1] > m:
            m = R[i, k + 1]
        e = E[i, y]
        for r in range(h, k):
            v = P[i, r] + e
            if v < 0:
                v = -v
            if v > m:
                m = v
        tot += m
    return tot


@nb.njit(cache=True, nogil=True)
def delta_value(E, P, L, R, h, k, x):
    """Total of row suprema after moving the element at rank h (= x) to rank k - 1."""
    N = P.shape[0]
    tot = 0
    for i in range(N):
        m = R[i, k - 1]
        if h > 0 and L[i, h - 1] > m:
            m = L[i, h - 1]
        e = E[i, x]
        for r in range(h + 1, k):
            v = P[i, r] - e
            if v < 0:
                v = -v
            if v > m:
                m = v
        tot += m
    return tot


@nb.njit(cache=True, nogil=True)
def pair_sweep(E, order, pos, P, L, R, pa, pb, cur, accept_ties):
    """One pass over the pairs (pa[t], pb[t]); returns (value, strictly improved, moves applied)."""
    improved = False
    moves = 0
    for t in range(pa.shape[0]):
        a = pa[t]
        b = pb[t]
        if pos[a] < pos[b]:
            x = a
            y = b
        else:
            x = b
            y = a
        h = pos[x]
        k = pos[y]
        if k == h + 1:
            continue
        vg = gamma_value(E, P, L, R, h, k, y)
        vd = delta_value(E, P, L, R, h, k, x)
        best = vg if vg >= vd else vd
        if best > cur or (accept_ties and best == cur):
            if best > cur:
                improved = True
            if vg >= vd:
                for r in range(k, h + 1, -1):
                    order[r] = order[r - 1]
                order[h + 1] = y
            else:
                for r in range(h, k - 1):
                    order[r] = order[r + 1]
                order[k - 1] = x
            cur = best
            moves += 1
            for r in range(h, k + 1):
                pos[order[r]] = r
            prefix_tables(E, order, P, L, R)
    return cur, improved, moves


@nb.njit(cache=True, nogil=True)
def branch_and_bound(E, incumbent, node_budget, use_swap, best_order):
    """Rank-by-rank depth-first search for the order maximizing the sum of row suprema.

    A node assigns the next rank to an unused index. The bound for a partial
    order is sum_i max(s_i, c_i + p_i, m_i - c_i) with s_i the running sup,
    c_i the prefix sum, p_i / m_i the positive / negative mass still unplaced.
    Only strictly better leaves replace the incumbent. Returns
    (best, nodes, pruned, exhausted, improved).
    """
    N = E.shape[0]
    cur = np.zeros((N + 1, N), dtype=np.int64)
    smax = np.zeros((N + 1, N), dtype=np.int64)
    pos_mass = np.zeros((N + 1, N), dtype=np.int64)
    neg_mass = np.zeros((N + 1, N), dtype=np.int64)
    for i in range(N):
        for j in range(N):
            e = E[i, j]
            if e > 0:
                pos_mass[0, i] += e
            else:
                neg_mass[0, i] -= e
    order = np.zeros(N, dtype=np.int64)
    used = np.zeros(N, dtype=np.bool_)
    next_j = np.zeros(N + 1, dtype=np.int64)
    nodes = 0
    pruned = 0
    exhausted = False
    improved = False
    d = 0
    while d >= 0:
        j = next_j[d]
        while j < N and (used[j] or (use_swap and (j & 1) == 1 and not used[j - 1])):
            j += 1
        if j == N:
            d -= 1
            if d >= 0:
                used[order[d]] = False
            continue
        next_j[d] = j + 1
        if nodes >= node_budget:
            exhausted = True
            break
        nodes += 1
        bound = 0
        for i in range(N):
            e = E[i, j]
            c = cur[d, i] + e
            s = smax[d, i]
            a = c if c >= 0 else -c
            if a > s:
                s = a
            p = pos_mass[d, i]
            m = neg_mass[d, i]
            if e > 0:
                p -= e
            else:
                m += e
            cur[d + 1, i] = c
            smax[d + 1, i] = s
            pos_mass[d + 1, i] = p
            neg_mass[d + 1, i] = m
            b = s
            if c + p > b:
                b = c + p
            if m - c > b:
                b = m - c
            bound += b
        if d + 1 == N:
            if bound > incumbent:
                incumbent = bound
                improved = True
                for r in range(N - 1):
                    best_order[r] = order[r]
                best_order[N - 1] = j
            continue
        if bound <= incumbent:
            pruned += 1
            continue
        used[j] = True
        order[d] = j
        d += 1
        next_j[d] = 0
    return incumbent, nodes, pruned, exhausted, improved
