"""Consistency analysis of learned similarity via agglomerative dendrograms.

Three similarity sources are compared on the same lesson set: the 0/1
ground-truth relation (same accident type and operation), an unsupervised
weighted-l1 baseline over raw co-observed samples (depth channels excluded,
channels z-scored over the database), and the trained pair classifier
(optimistic full-data scores, or well-disjoint cross-validated scores).
Dendrograms use average linkage on distance 1 - similarity.
"""

from __future__ import annotations

import csv
import dataclasses
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Optional, Sequence

import numpy as np

from . import gbdt
from .features import pair_features_matrix
from .gbdt import GbdtModel, TrainConfig
from .lessons import LessonDatabase, build_pair_dataset, ground_truth_similar
from .telemetry import ChannelId

DEPTH_CHANNELS = (ChannelId.BIT_DEPTH, ChannelId.BOTTOMHOLE_DEPTH)

MODES = ("ground_truth", "unsupervised_l1", "model_train", "model_cv")


@dataclass(frozen=True)
class SimilarityMatrix:
    values: np.ndarray
    mode: str
    lesson_ids: tuple[str, ...]

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2 or v.shape[0] != v.shape[1] or v.shape[0] != len(self.lesson_ids):
            raise ValueError("similarity matrix must be square over the lesson ids")
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if not np.allclose(v, v.T, atol=1e-9):
            raise ValueError("similarity matrix must be symmetric")
        object.__setattr__(self, "values", v)


@dataclass(frozen=True)
class Dendrogram:
    """n-1 merge rows (left id, right id, height, member count). Leaves are
    0..n-1; merge i creates cluster n+i."""

    merges: np.ndarray
    n_leaves: int

    def __post_init__(self):
        m = np.asarray(self.merges, dtype=np.float64)
        if m.shape != (self.n_leaves - 1, 4):
            raise ValueError("merges must be an (n-1, 4) array")
        heights = m[:, 2]
        if np.any(np.diff(heights) < -1e-12):
            raise ValueError("merge heights must be non-decreasing")
        object.__setattr__(self, "merges", m)


def ground_truth_matrix(db: LessonDatabase) -> SimilarityMatrix:
    n = len(db)
    if n < 2:
        raise ValueError("need at least 2 lessons")
    S = np.zeros((n, n))
    for i in range(n):
        for j in range(i, n):
            s = 1.0 if ground_truth_similar(db.lessons[i], db.lessons[j]) else 0.0
            S[i, j] = S[j, i] = s
    return SimilarityMatrix(S, "ground_truth", tuple(l.lesson_id for l in db.lessons))


def unsupervised_l1_matrix(
    db: LessonDatabase,
    weights: Optional[Mapping[ChannelId, float]] = None,
) -> SimilarityMatrix:
    """Similarity 1 / (1 + d) where d is the weighted mean-|difference| of
    z-scored raw samples over co-observed ticks, summed over non-depth
    channels. A channel with zero database variance gets weight 0."""
    n = len(db)
    if n < 2:
        raise ValueError("need at least 2 lessons")
    channels = [c for c in db.window_config.channels if c not in DEPTH_CHANNELS]
    if weights is None:
        weights = {c: 1.0 for c in channels}
    ticks = db.window_config.interval_ticks
    D = np.zeros((n, n))
    for c in channels:
        w = float(weights.get(c, 0.0))
        if w == 0.0:
            continue
        V = np.full((n, ticks), np.nan)
        for i, lesson in enumerate(db.lessons):
            if lesson.interval.has_channel(c):
                vals = lesson.interval.values(c).copy()
                vals[lesson.interval.missing(c)] = np.nan
                V[i] = vals
        observed = V[~np.isnan(V)]
        if observed.size == 0:
            continue
        mu = observed.mean()
        sigma = observed.std()
        if sigma == 0.0:
            continue  # zero database variance: weight forced to 0
        Z = (V - mu) / sigma
        with np.errstate(invalid="ignore"):
            diff = np.abs(Z[:, None, :] - Z[None, :, :])
            per_pair = np.nanmean(diff, axis=2)
        D += w * np.nan_to_num(per_pair, nan=0.0)  # no co-observed ticks: contributes 0
    S = 1.0 / (1.0 + D)
    np.fill_diagonal(S, 1.0)
    return SimilarityMatrix(S, "unsupervised_l1", tuple(l.lesson_id for l in db.lessons))


def model_matrix(
    db: LessonDatabase,
    model: Optional[GbdtModel] = None,
    mode: str = "train",
    train_config: Optional[TrainConfig] = None,
    cv_folds: int = 5,
    seed: int = 0,
) -> SimilarityMatrix:
    """Pairwise classifier similarities with unit diagonal.

    train: scores every pair with the supplied full-data model (an
    optimistic estimate). cv: wells are dealt into folds and the entry for
    lessons in folds (f, g) comes from a model trained with both folds'
    wells excluded (a more realistic estimate)."""
    n = len(db)
    if n < 2:
        raise ValueError("need at least 2 lessons")
    ids = tuple(l.lesson_id for l in db.lessons)
    S = np.eye(n)
    ia, ib = np.triu_indices(n, k=1)

    if mode == "train":
        if model is None:
            raise ValueError("train mode requires a trained model")
        X, _, _ = build_pair_dataset(db)
        scores = model.predict_score(X)
        S[ia, ib] = scores
        S[ib, ia] = scores
        return SimilarityMatrix(S, "model_train", ids)

    if mode != "cv":
        raise ValueError(f"unknown mode {mode!r}")
    if train_config is None:
        raise ValueError("cv mode requires a train_config")

    feats = db.feature_matrix
    for step, train_idx, qa, qb in cv_fold_plan(db, cv_folds, seed):
        sub = db.subset(train_idx)
        X_tr, y_tr, _ = build_pair_dataset(sub)
        if not (np.any(y_tr == 0) and np.any(y_tr == 1)):
            raise ValueError("a cv fold pair leaves single-class training pairs")
        cfg = dataclasses.replace(train_config, seed=train_config.seed + step)
        m = gbdt.fit(X_tr, y_tr, cfg, layout_hash=db.window_config.pair_layout_hash())
        scores = m.predict_score(pair_features_matrix(feats[qa], feats[qb]))
        S[qa, qb] = scores
        S[qb, qa] = scores
    return SimilarityMatrix(S, "model_cv", ids)


def cv_fold_plan(
    db: LessonDatabase, cv_folds: int, seed: int
) -> list[tuple[int, list[int], np.ndarray, np.ndarray]]:
    """Deterministic fold-pair schedule for cv-mode model matrices.

    Wells are dealt into folds; for every fold pair (f, g) the plan lists
    (step, training lesson indices, pair row indices, pair column indices)
    where training excludes all lessons from wells in f or g, so every
    scored entry comes from a model that saw neither lesson's well."""
    n = len(db)
    wells = list(db.wells)
    if len(wells) < cv_folds:
        cv_folds = len(wells)
    if cv_folds < 2:
        raise ValueError("cv mode needs lessons from at least 2 wells")
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(wells))
    fold_of_well = {wells[w]: int(k % cv_folds) for k, w in enumerate(order)}
    fold_of_lesson = np.array([fold_of_well[l.well_id] for l in db.lessons])
    ia, ib = np.triu_indices(n, k=1)
    plan = []
    step = 0
    for f in range(cv_folds):
        for g in range(f, cv_folds):
            train_idx = [i for i in range(n) if fold_of_lesson[i] not in (f, g)]
            pair_mask = (
                ((fold_of_lesson[ia] == f) & (fold_of_lesson[ib] == g))
                | ((fold_of_lesson[ia] == g) & (fold_of_lesson[ib] == f))
            )
            step += 1
            if not np.any(pair_mask):
                continue
            if len(train_idx) < 2:
                raise ValueError(f"cv folds ({f}, {g}) leave fewer than 2 training lessons")
            plan.append((step, train_idx, ia[pair_mask], ib[pair_mask]))
    return plan


def agglomerate(matrix: SimilarityMatrix) -> Dendrogram:
    """Average-linkage agglomeration on distance 1 - similarity. Equal-height
    candidates merge in order of lowest (row, column) pair index."""
    S = matrix.values
    n = S.shape[0]
    work = 1.0 - (S + S.T) / 2.0
    np.fill_diagonal(work, np.inf)
    cluster_id = np.arange(n)
    sizes = np.ones(n)
    merges = np.empty((n - 1, 4))
    iu = np.triu_indices(n, k=1)
    for step in range(n - 1):
        vals = work[iu]
        flat = int(np.argmin(vals))  # row-major: ties resolve to lowest (i, j)
        i = int(iu[0][flat])
        j = int(iu[1][flat])
        h = float(work[i, j])
        a, b = cluster_id[i], cluster_id[j]
        merges[step] = (min(a, b), max(a, b), h, sizes[i] + sizes[j])
        # Lance-Williams average-linkage update onto row/col i
        alive = np.isfinite(work[:, j]) | np.isfinite(work[j, :])
        alive[i] = alive[j] = False
        new_d = (sizes[i] * work[i, :] + sizes[j] * work[j, :]) / (sizes[i] + sizes[j])
        work[i, alive] = new_d[alive]
        work[alive, i] = new_d[alive]
        work[j, :] = np.inf
        work[:, j] = np.inf
        cluster_id[i] = n + step
        sizes[i] += sizes[j]
    return Dendrogram(merges=merges, n_leaves=n)


def cut(dendrogram: Dendrogram, k: int) -> np.ndarray:
    """Cluster labels (0..k-1) from stopping the merge sequence at k clusters.
    Labels are ordered by each cluster's first leaf."""
    n = dendrogram.n_leaves
    if not 1 <= k <= n:
        raise ValueError(f"k must lie in [1, {n}]")
    parent = list(range(2 * n - 1))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for step in range(n - k):
        a, b, _, _ = dendrogram.merges[step]
        new = n + step
        parent[find(int(a))] = new
        parent[find(int(b))] = new
    roots: dict[int, int] = {}
    labels = np.empty(n, dtype=np.int64)
    for leaf in range(n):
        r = find(leaf)
        if r not in roots:
            roots[r] = len(roots)
        labels[leaf] = roots[r]
    return labels


def purity(labels: np.ndarray, groups: Sequence) -> float:
    """Sum over clusters of the plurality group count, divided by n."""
    labels = np.asarray(labels)
    if len(labels) != len(groups):
        raise ValueError("labels and groups must align")
    total = 0
    for c in np.unique(labels):
        members = [groups[i] for i in np.nonzero(labels == c)[0]]
        counts: dict = {}
        for g in members:
            counts[g] = counts.get(g, 0) + 1
        total += max(counts.values())
    return total / len(labels)


def write_linkage_csv(dendrogram: Dendrogram, path: str | Path) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["left", "right", "height", "count"])
        for left, right, height, count in dendrogram.merges:
            writer.writerow([int(left), int(right), repr(float(height)), int(count)])


def write_assignments_csv(
    lesson_ids: Sequence[str], labels: np.ndarray, path: str | Path
) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["lesson_id", "cluster"])
        for lid, lab in zip(lesson_ids, labels):
            writer.writerow([lid, int(lab)])
