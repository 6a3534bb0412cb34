#!/usr/bin/env python3
"""From lesson windows to a trained pair-similarity model.

Each 2-hour interval collapses into 180 aggregated statistics (9 channels x
4 trailing windows x 5 statistics); a pair of intervals becomes a symmetric
540-entry vector (|a-b|, min, max). Pairs of lessons are labeled similar
exactly when accident type and operation both coincide, and a boosted-tree
classifier learns that relation. The script shows the feature layout, the
pair dataset, the training curve, and the round-trip through serialization.
"""

import numpy as np

from mwdmatch import gbdt
from mwdmatch.features import WindowConfig
from mwdmatch.gbdt import TrainConfig
from mwdmatch.lessons import build_pair_dataset, database_from_corpus
from mwdmatch.synthgen import AccidentType, OperationType, generate_corpus

composition = {
    (AccidentType.STUCK, OperationType.DRILLING): 5,
    (AccidentType.STUCK, OperationType.TRIPPING_IN): 5,
    (AccidentType.WASHOUT, OperationType.DRILLING): 5,
    (AccidentType.SHALE_COLLAR, OperationType.DRILLING): 5,
}

config = WindowConfig()
print("feature layout:")
print(f"  channels: {[c.value for c in config.channels]}")
print(f"  trailing windows (ticks): {config.window_ticks}")
print(f"  statistics: mean, variance, slope_angle, mean_abs_dev, rel_coeff")
print(f"  interval vector length: {config.n_features}, pair vector length: {config.n_pair_features}")
print(f"  pair layout hash: {config.pair_layout_hash()[:16]}...")

corpus = generate_corpus(seed=21, composition=composition)
db = database_from_corpus(corpus, config)
X, y, index = build_pair_dataset(db)
print(f"\npair dataset: {X.shape[0]} unordered pairs from {len(db)} lessons "
      f"({int(y.sum())} similar, prevalence {y.mean():.3f})")
print(f"  e.g. pair {index[0]}: label {y[0]}")
print(f"  missing entries in X: {np.isnan(X).mean():.1%} (handled natively by the trees)")

cfg = TrainConfig(n_trees=120, seed=1)
print(f"\ntraining {cfg.n_trees} trees, depth {cfg.max_depth}, lr {cfg.learning_rate}...")
model = gbdt.fit(X, y, cfg, layout_hash=config.pair_layout_hash())
losses = model.training_loss
print(f"  logistic loss: {losses[0]:.4f} (prior) -> {losses[10]:.4f} (10 rounds) "
      f"-> {losses[-1]:.4f} (final)")

scores = model.predict_score(X)
print(f"  training scores: similar pairs median {np.median(scores[y == 1]):.3f}, "
      f"dissimilar median {np.median(scores[y == 0]):.3f}")

blob = gbdt.serialize(model)
clone = gbdt.deserialize(blob)
print(f"\nserialized model: {len(blob) / 1024:.0f} KiB; "
      f"round-trip predictions identical: "
      f"{bool(np.array_equal(clone.predict_score(X), scores))}")
