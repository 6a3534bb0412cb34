"""Gradient-boosted decision trees for binary classification.

Newton boosting on logistic loss: per round the gradients are g = p - y and
hessians h = p(1 - p); depth-limited trees greedily maximize the standard
second-order gain and leaves carry -sum(g) / (sum(h) + lambda). Missing
feature values are routed natively: at training time they are attached to
the split direction with the higher gain, and that default direction is
stored in the node for prediction.

Everything is deterministic given the config seed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _kernels
from .features import LayoutMismatchError

FORMAT_NAME = "mwdmatch-gbdt"
FORMAT_VERSION = 1


class ModelFormatError(ValueError):
    """Corrupt, truncated, or incompatible serialized model."""


@dataclass(frozen=True)
class TrainConfig:
    n_trees: int = 200
    max_depth: int = 4
    learning_rate: float = 0.1
    min_samples_leaf: int = 5
    row_subsample: float = 0.8
    feature_subsample: float = 0.8
    reg_lambda: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if not 0.0 < self.learning_rate <= 1.0:
            raise ValueError("learning_rate must lie in (0, 1]")
        if self.min_samples_leaf < 1:
            raise ValueError("min_samples_leaf must be >= 1")
        if not 0.0 < self.row_subsample <= 1.0:
            raise ValueError("row_subsample must lie in (0, 1]")
        if not 0.0 < self.feature_subsample <= 1.0:
            raise ValueError("feature_subsample must lie in (0, 1]")
        if self.reg_lambda < 0.0:
            raise ValueError("reg_lambda must be >= 0")


@dataclass
class Tree:
    """Flat node arrays. feature == -1 marks a leaf; children index into the
    same arrays; default_left tells missing values which way to go."""

    feature: np.ndarray      # int32
    threshold: np.ndarray    # float64
    left: np.ndarray         # int32
    right: np.ndarray        # int32
    default_left: np.ndarray  # uint8
    value: np.ndarray        # float64 (leaf score; 0 for internal nodes)

    @property
    def n_nodes(self) -> int:
        return len(self.feature)


@dataclass
class GbdtModel:
    base_score: float
    learning_rate: float
    trees: list[Tree]
    n_features: int
    layout_hash: str = ""
    format_version: int = FORMAT_VERSION
    training_loss: list[float] = field(default_factory=list)
    _flat: Optional[tuple] = field(default=None, repr=False, compare=False)

    def _flattened(self) -> tuple:
        if self._flat is None:
            starts = np.zeros(len(self.trees) + 1, dtype=np.int64)
            for i, t in enumerate(self.trees):
                starts[i + 1] = starts[i] + t.n_nodes
            total = int(starts[-1])
            feat = np.full(total, -1, dtype=np.int32)
            thr = np.zeros(total)
            left = np.zeros(total, dtype=np.int32)
            right = np.zeros(total, dtype=np.int32)
            dleft = np.zeros(total, dtype=np.uint8)
            value = np.zeros(total)
            for i, t in enumerate(self.trees):
                s = starts[i]
                e = starts[i + 1]
                feat[s:e] = t.feature
                thr[s:e] = t.threshold
                left[s:e] = t.left + s
                right[s:e] = t.right + s
                dleft[s:e] = t.default_left
                value[s:e] = t.value
            self._flat = (feat, thr, left, right, dleft, value, starts)
        return self._flat

    def predict_raw(self, X: np.ndarray) -> np.ndarray:
        X = np.ascontiguousarray(np.atleast_2d(np.asarray(X, dtype=np.float64)))
        if X.shape[1] != self.n_features:
            raise LayoutMismatchError(
                f"model expects {self.n_features} features, got {X.shape[1]}"
            )
        if not self.trees:
            return np.full(X.shape[0], self.base_score)
        feat, thr, left, right, dleft, value, starts = self._flattened()
        return _kernels.predict_raw(
            X, feat, thr, left, right, dleft, value, starts,
            self.learning_rate, self.base_score,
        )

    def predict_score(self, x: np.ndarray, layout_hash: Optional[str] = None) -> np.ndarray | float:
        """Similarity score(s) in (0, 1). Accepts one vector or a matrix."""
        if layout_hash is not None and layout_hash != self.layout_hash:
            raise LayoutMismatchError(
                "feature layout hash does not match the one embedded in the model"
            )
        x = np.asarray(x, dtype=np.float64)
        single = x.ndim == 1
        out = _sigmoid(self.predict_raw(x))
        return float(out[0]) if single else out


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _log_loss(y: np.ndarray, p: np.ndarray) -> float:
    p = np.clip(p, 1e-12, 1.0 - 1e-12)
    return float(-np.mean(y * np.log(p) + (1.0 - y) * np.log(1.0 - p)))


class _TreeBuilder:
    def __init__(self, xt, g, h, feats, go_buf, config: TrainConfig):
        self.xt = xt
        self.g = g
        self.h = h
        self.feats = feats
        self.go_buf = go_buf
        self.cfg = config
        self.feature: list[int] = []
        self.threshold: list[float] = []
        self.left: list[int] = []
        self.right: list[int] = []
        self.default_left: list[int] = []
        self.value: list[float] = []

    def _add_node(self) -> int:
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.default_left.append(1)
        self.value.append(0.0)
        return len(self.feature) - 1

    def grow(self, idx: np.ndarray, depth: int) -> int:
        cfg = self.cfg
        m = idx.shape[1]
        g_tot = float(self.g[idx[0]].sum())
        h_tot = float(self.h[idx[0]].sum())
        node = self._add_node()
        split = None
        if depth < cfg.max_depth and m >= 2 * cfg.min_samples_leaf:
            gain, col, thr, dl = _kernels.best_split(
                idx, self.xt, self.g, self.h, self.feats,
                g_tot, h_tot, cfg.reg_lambda, cfg.min_samples_leaf,
            )
            if col >= 0 and gain > 0.0:
                split = (int(col), float(thr), int(dl))
        if split is None:
            self.value[node] = -g_tot / (h_tot + cfg.reg_lambda)
            return node
        col, thr, dl = split
        f = int(self.feats[col])
        idx_l, idx_r = _kernels.partition(idx, self.xt, f, thr, dl, self.go_buf)
        self.feature[node] = f
        self.threshold[node] = thr
        self.default_left[node] = dl
        self.left[node] = self.grow(idx_l, depth + 1)
        self.right[node] = self.grow(idx_r, depth + 1)
        return node

    def build(self) -> Tree:
        return Tree(
            feature=np.asarray(self.feature, dtype=np.int32),
            threshold=np.asarray(self.threshold),
            left=np.asarray(self.left, dtype=np.int32),
            right=np.asarray(self.right, dtype=np.int32),
            default_left=np.asarray(self.default_left, dtype=np.uint8),
            value=np.asarray(self.value),
        )


def fit(
    X: np.ndarray,
    y: np.ndarray,
    config: TrainConfig = TrainConfig(),
    layout_hash: str = "",
) -> GbdtModel:
    """Train a boosted ensemble. Missing entries in X must be NaN.

    Raises ValueError for fewer than two rows or single-class labels.
    """
    X = np.ascontiguousarray(np.asarray(X, dtype=np.float64))
    y = np.asarray(y, dtype=np.float64).ravel()
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("X must be a non-empty 2-D matrix")
    if X.shape[0] != y.shape[0]:
        raise ValueError("X and y lengths differ")
    if X.shape[0] < 2:
        raise ValueError("need at least 2 training rows")
    if not (np.any(y == 0.0) and np.any(y == 1.0)):
        raise ValueError("both classes must be present in y")

    n, n_feat = X.shape
    cfg = config
    rng = np.random.default_rng(cfg.seed)
    prevalence = float(y.mean())
    base = float(np.log(prevalence / (1.0 - prevalence)))

    presort_t = np.ascontiguousarray(np.argsort(X, axis=0, kind="stable").T.astype(np.int32))
    xt = np.ascontiguousarray(X.T)
    go_buf = np.zeros(n, dtype=np.uint8)
    raw = np.full(n, base)
    losses = [_log_loss(y, _sigmoid(raw))]
    trees: list[Tree] = []

    for _ in range(cfg.n_trees):
        p = _sigmoid(raw)
        g = p - y
        h = p * (1.0 - p)

        if cfg.row_subsample < 1.0:
            m = max(2, int(round(n * cfg.row_subsample)))
            rows = np.sort(rng.choice(n, size=m, replace=False))
        else:
            rows = np.arange(n)
        member = np.zeros(n, dtype=bool)
        member[rows] = True

        if cfg.feature_subsample < 1.0:
            k = max(1, int(round(n_feat * cfg.feature_subsample)))
            feats = np.sort(rng.choice(n_feat, size=k, replace=False)).astype(np.int64)
        else:
            feats = np.arange(n_feat, dtype=np.int64)

        root = _kernels.build_root(presort_t, member, feats, len(rows))
        builder = _TreeBuilder(xt, g, h, feats, go_buf, cfg)
        builder.grow(root, depth=0)
        tree = builder.build()
        trees.append(tree)

        one = GbdtModel(0.0, 1.0, [tree], n_feat)
        raw = raw + cfg.learning_rate * one.predict_raw(X)
        losses.append(_log_loss(y, _sigmoid(raw)))

    return GbdtModel(
        base_score=base,
        learning_rate=cfg.learning_rate,
        trees=trees,
        n_features=n_feat,
        layout_hash=layout_hash,
        training_loss=losses,
    )


def predict_score(model: GbdtModel, x: np.ndarray, layout_hash: Optional[str] = None):
    return model.predict_score(x, layout_hash=layout_hash)


def serialize(model: GbdtModel) -> bytes:
    """Versioned JSON dump; floats round-trip bit-exactly."""
    payload = {
        "format": FORMAT_NAME,
        "version": model.format_version,
        "base_score": model.base_score,
        "learning_rate": model.learning_rate,
        "n_features": model.n_features,
        "layout_hash": model.layout_hash,
        "trees": [
            {
                "feature": t.feature.tolist(),
                "threshold": t.threshold.tolist(),
                "left": t.left.tolist(),
                "right": t.right.tolist(),
                "default_left": t.default_left.tolist(),
                "value": t.value.tolist(),
            }
            for t in model.trees
        ],
    }
    return json.dumps(payload, separators=(",", ":")).encode()


def deserialize(data: bytes) -> GbdtModel:
    try:
        payload = json.loads(data.decode())
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ModelFormatError(f"corrupt model stream: {exc}") from None
    if not isinstance(payload, dict) or payload.get("format") != FORMAT_NAME:
        raise ModelFormatError("not a serialized model")
    if payload.get("version") != FORMAT_VERSION:
        raise ModelFormatError(f"unsupported model version {payload.get('version')!r}")
    try:
        trees = [
            Tree(
                feature=np.asarray(t["feature"], dtype=np.int32),
                threshold=np.asarray(t["threshold"], dtype=np.float64),
                left=np.asarray(t["left"], dtype=np.int32),
                right=np.asarray(t["right"], dtype=np.int32),
                default_left=np.asarray(t["default_left"], dtype=np.uint8),
                value=np.asarray(t["value"], dtype=np.float64),
            )
            for t in payload["trees"]
        ]
        model = GbdtModel(
            base_score=float(payload["base_score"]),
            learning_rate=float(payload["learning_rate"]),
            trees=trees,
            n_features=int(payload["n_features"]),
            layout_hash=str(payload["layout_hash"]),
        )
    except (KeyError, TypeError) as exc:
        raise ModelFormatError(f"malformed model payload: {exc}") from None
    for t in model.trees:
        lengths = {len(t.feature), len(t.threshold), len(t.left), len(t.right),
                   len(t.default_left), len(t.value)}
        if len(lengths) != 1:
            raise ModelFormatError("inconsistent tree arrays")
    return model


def save(model: GbdtModel, path) -> None:
    with open(path, "wb") as fh:
        fh.write(serialize(model))


def load(path) -> GbdtModel:
    with open(path, "rb") as fh:
        return deserialize(fh.read())
