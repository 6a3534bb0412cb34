#!/usr/bin/env python3
"""Do the learned similarities reproduce the true accident grouping?

Three similarity matrices over the same lessons are agglomerated into
average-linkage dendrograms and cut at the number of true groups:

  ground_truth     1 iff accident type and operation coincide (the target)
  unsupervised_l1  weighted l1 distance on z-scored raw signals, depths
                   excluded, mapped through 1 / (1 + d)
  model_train      the trained pair classifier's scores (optimistic)
  model_cv         fold-held-out classifier scores (realistic)

Purity at the cut measures how well each mode recovers the grouping; the
learned similarity should beat the raw-signal baseline.
"""

import numpy as np

from mwdmatch import gbdt
from mwdmatch.clustering import (
    agglomerate,
    cut,
    ground_truth_matrix,
    model_matrix,
    purity,
    unsupervised_l1_matrix,
)
from mwdmatch.gbdt import TrainConfig
from mwdmatch.lessons import build_pair_dataset, database_from_corpus
from mwdmatch.synthgen import AccidentType, OperationType, generate_corpus

composition = {
    (AccidentType.STUCK, OperationType.DRILLING): 5,
    (AccidentType.STUCK, OperationType.TRIPPING_IN): 5,
    (AccidentType.WASHOUT, OperationType.DRILLING): 5,
    (AccidentType.MUD_LOSS, OperationType.DRILLING): 5,
    (AccidentType.SHALE_COLLAR, OperationType.DRILLING): 5,
}

print("building corpus and model...")
corpus = generate_corpus(seed=13, composition=composition)
db = database_from_corpus(corpus)
X, y, _ = build_pair_dataset(db)
model = gbdt.fit(X, y, TrainConfig(n_trees=120, seed=0),
                 layout_hash=db.window_config.pair_layout_hash())

groups = [(l.accident_type.value, l.operation.value) for l in db.lessons]
k = len(db.by_group)
print(f"{len(db)} lessons in {k} true groups")

matrices = {
    "ground_truth": ground_truth_matrix(db),
    "unsupervised_l1": unsupervised_l1_matrix(db),
    "model_train": model_matrix(db, model=model, mode="train"),
    "model_cv": model_matrix(db, mode="cv",
                             train_config=TrainConfig(n_trees=80, seed=0),
                             cv_folds=5, seed=3),
}

print(f"\npurity of the k={k} cut per similarity mode:")
for name, matrix in matrices.items():
    dendrogram = agglomerate(matrix)
    labels = cut(dendrogram, k)
    p = purity(labels, groups)
    heights = dendrogram.merges[:, 2]
    print(f"  {name:16s} purity {p:.3f}   merge heights "
          f"{heights[0]:.3f} ... {heights[-1]:.3f}")

print("\ncluster composition for model_train at the cut:")
labels = cut(agglomerate(matrices["model_train"]), k)
for c in sorted(set(labels.tolist())):
    members = [groups[i] for i in np.nonzero(labels == c)[0]]
    accident_ops = sorted(set(members))
    print(f"  cluster {c}: {len(members)} lessons, groups {accident_ops}")
