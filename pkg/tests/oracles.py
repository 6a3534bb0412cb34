"""Independent brute-force oracles used to cross-check the library.

Each oracle recomputes a result by the most literal route available
(exhaustive enumeration, pair counting, from-scratch cluster distances)
and stays deliberately ignorant of the library's internals.
"""

import numpy as np


def best_split_oracle(X, g, h, lam, min_leaf):
    """Exhaustive search over every (feature, midpoint threshold, default
    direction); returns (gain, feature, threshold, default_left) of the best
    candidate, ties broken by lowest feature, lowest threshold, default-left
    first. Gain convention matches the trainer: 0.5 * (score_l + score_r -
    score_parent) with score = G^2 / (H + lam)."""
    X = np.asarray(X, dtype=float)
    g = np.asarray(g, dtype=float)
    h = np.asarray(h, dtype=float)
    n, n_feat = X.shape
    parent = g.sum() ** 2 / (h.sum() + lam)
    best = (0.0, -1, 0.0, 1)
    for f in range(n_feat):
        col = X[:, f]
        obs = ~np.isnan(col)
        vals = np.unique(col[obs])
        for a, b in zip(vals[:-1], vals[1:]):
            thr = 0.5 * (a + b)
            if thr < a or thr >= b:
                continue
            for dl in (1, 0):
                left = np.where(obs, col <= thr, dl == 1)
                nl = int(left.sum())
                if nl < min_leaf or n - nl < min_leaf:
                    continue
                gl, hl = g[left].sum(), h[left].sum()
                gr, hr = g[~left].sum(), h[~left].sum()
                gain = 0.5 * (gl * gl / (hl + lam) + gr * gr / (hr + lam) - parent)
                if gain > best[0]:
                    best = (gain, f, thr, dl)
    return best


def mann_whitney_auc(labels, scores):
    """ROC AUC by counting concordant positive/negative pairs, ties half."""
    labels = np.asarray(labels)
    scores = np.asarray(scores, dtype=float)
    pos = scores[labels == 1]
    neg = scores[labels == 0]
    wins = 0.0
    for p in pos:
        for q in neg:
            if p > q:
                wins += 1.0
            elif p == q:
                wins += 0.5
    return wins / (len(pos) * len(neg))


def pr_auc_threshold_oracle(labels, scores):
    """Average precision over every distinct threshold, computed by direct
    counting: sum of precision * recall increments, descending thresholds."""
    labels = np.asarray(labels)
    scores = np.asarray(scores, dtype=float)
    n_pos = int((labels == 1).sum())
    area = 0.0
    prev_recall = 0.0
    for thr in sorted(set(scores.tolist()), reverse=True):
        pred = scores >= thr
        tp = int(((labels == 1) & pred).sum())
        fp = int(((labels == 0) & pred).sum())
        recall = tp / n_pos
        precision = tp / (tp + fp)
        area += (recall - prev_recall) * precision
        prev_recall = recall
    return area


def average_linkage_oracle(D):
    """Agglomeration where every cluster distance is recomputed from scratch
    as the mean pairwise leaf distance (no Lance-Williams updates). The
    merged cluster replaces the lower-positioned member, mirroring the
    library's working-matrix tie order: lowest (row, column) wins ties."""
    D = np.asarray(D, dtype=float)
    n = D.shape[0]
    clusters = [[i] for i in range(n)]
    ids = list(range(n))
    merges = []
    for step in range(n - 1):
        best = (np.inf, -1, -1)
        for i in range(len(clusters)):
            for j in range(i + 1, len(clusters)):
                d = np.mean([D[a, b] for a in clusters[i] for b in clusters[j]])
                if d < best[0]:
                    best = (d, i, j)
        d, i, j = best
        a, b = ids[i], ids[j]
        merges.append((min(a, b), max(a, b), d, len(clusters[i]) + len(clusters[j])))
        clusters[i] = clusters[i] + clusters[j]
        ids[i] = n + step
        del clusters[j]
        del ids[j]
    return merges


def window_stats_oracle(values):
    """The five window statistics by plain scalar arithmetic (no numpy
    reductions): mean, population variance, atan of least-squares slope,
    mean absolute deviation, std/mean."""
    import math

    obs = [(i, v) for i, v in enumerate(values) if not (isinstance(v, float) and math.isnan(v))]
    out = [math.nan] * 5
    if not obs:
        return out
    xs = [v for _, v in obs]
    n = len(xs)
    mean = sum(xs) / n
    out[0] = mean
    if n < 2:
        return out
    var = sum((v - mean) ** 2 for v in xs) / n
    out[1] = var
    ts = [t for t, _ in obs]
    t_mean = sum(ts) / n
    num = sum((t - t_mean) * (v - mean) for t, v in obs)
    den = sum((t - t_mean) ** 2 for t in ts)
    out[2] = math.atan(num / den)
    out[3] = sum(abs(v - mean) for v in xs) / n
    if abs(mean) > 1e-9:
        out[4] = math.sqrt(var) / mean
    return out
