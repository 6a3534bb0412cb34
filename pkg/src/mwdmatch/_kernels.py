"""Numba kernels for tree growing and forest prediction.

Rows are pre-sorted per feature once per fit (NaN last). A tree node is a
(K, m) matrix of row ids, one row per candidate feature, each in ascending
feature-value order; partitions preserve that order so nodes never re-sort.
Feature values are read from the transposed matrix xt (F, N), keeping every
column scan inside one contiguous buffer. Missing values never enter
threshold candidates; they are attached to whichever child yields the
higher gain (the stored default direction). All kernels are single-threaded
for bit-reproducibility.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def build_root(presort_t, member, feats, m):
    """Per-tree root state: member rows of the full presorted index.

    presort_t: (F, N) int32, presort_t[f] = row ids ascending by feature f.
    member:    (N,) bool row-subsample mask; m = member count.
    Returns (K, m) int32 with K = len(feats).
    """
    N = presort_t.shape[1]
    K = feats.shape[0]
    idx = np.empty((K, m), dtype=np.int32)
    for k in range(K):
        f = feats[k]
        j = 0
        for i in range(N):
            r = presort_t[f, i]
            if member[r]:
                idx[k, j] = r
                j += 1
    return idx


@njit(cache=True)
def best_split(idx, xt, g, h, feats, g_tot, h_tot, lam, min_leaf):
    """Exact greedy split over one node's K candidate features.

    Candidates are midpoints between consecutive distinct observed values;
    for each, both default directions for missing rows are scored. Returns
    (gain, feature column, threshold, default_left). Ties keep the first
    candidate scanned: lowest feature column, then lowest threshold, then
    default-left.
    """
    K, m = idx.shape
    parent = g_tot * g_tot / (h_tot + lam)
    best_gain = 0.0
    best_col = -1
    best_thr = 0.0
    best_dl = 1
    for k in range(K):
        f = feats[k]
        n_miss = 0
        while n_miss < m and np.isnan(xt[f, idx[k, m - 1 - n_miss]]):
            n_miss += 1
        n_obs = m - n_miss
        if n_obs < 2:
            continue
        g_miss = 0.0
        h_miss = 0.0
        for i in range(n_obs, m):
            r = idx[k, i]
            g_miss += g[r]
            h_miss += h[r]
        cg = 0.0
        ch = 0.0
        for i in range(n_obs - 1):
            r = idx[k, i]
            cg += g[r]
            ch += h[r]
            xa = xt[f, r]
            xb = xt[f, idx[k, i + 1]]
            if xb <= xa:
                continue
            thr = 0.5 * (xa + xb)
            if thr < xa or thr >= xb:
                # adjacent floats: the midpoint cannot separate a from b
                continue
            nl = i + 1
            nr = n_obs - nl
            if nl + n_miss >= min_leaf and nr >= min_leaf:
                gl = cg + g_miss
                hl = ch + h_miss
                gr = g_tot - gl
                hr = h_tot - hl
                gain = 0.5 * (gl * gl / (hl + lam) + gr * gr / (hr + lam) - parent)
                if gain > best_gain:
                    best_gain = gain
                    best_col = k
                    best_thr = thr
                    best_dl = 1
            if nl >= min_leaf and nr + n_miss >= min_leaf:
                gl = cg
                hl = ch
                gr = g_tot - gl
                hr = h_tot - hl
                gain = 0.5 * (gl * gl / (hl + lam) + gr * gr / (hr + lam) - parent)
                if gain > best_gain:
                    best_gain = gain
                    best_col = k
                    best_thr = thr
                    best_dl = 0
    return best_gain, best_col, best_thr, best_dl


@njit(cache=True)
def partition(idx, xt, f, thr, default_left, go):
    """Split a node's row-id matrix into child matrices, order kept.

    f is the global feature id of the chosen split; go is an (N,) uint8
    scratch buffer keyed by row id.
    """
    K, m = idx.shape
    n_left = 0
    for i in range(m):
        r = idx[0, i]
        v = xt[f, r]
        if np.isnan(v):
            left = default_left == 1
        else:
            left = v <= thr
        go[r] = 1 if left else 0
        if left:
            n_left += 1
    idx_l = np.empty((K, n_left), dtype=np.int32)
    idx_r = np.empty((K, m - n_left), dtype=np.int32)
    for k in range(K):
        li = 0
        ri = 0
        for i in range(m):
            r = idx[k, i]
            if go[r] == 1:
                idx_l[k, li] = r
                li += 1
            else:
                idx_r[k, ri] = r
                ri += 1
    return idx_l, idx_r


@njit(cache=True)
def predict_raw(X, feat, thr, left, right, default_left, value, tree_start, lr, base):
    """Raw (pre-sigmoid) forest scores for a batch of rows."""
    n = X.shape[0]
    T = tree_start.shape[0] - 1
    out = np.full(n, base)
    for i in range(n):
        s = 0.0
        for t in range(T):
            node = tree_start[t]
            while feat[node] >= 0:
                v = X[i, feat[node]]
                if np.isnan(v):
                    node = left[node] if default_left[node] == 1 else right[node]
                elif v <= thr[node]:
                    node = left[node]
                else:
                    node = right[node]
            s += value[node]
        out[i] += lr * s
    return out
