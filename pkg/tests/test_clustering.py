import numpy as np
import pytest

from mwdmatch.clustering import (
    SimilarityMatrix,
    agglomerate,
    cut,
    cv_fold_plan,
    ground_truth_matrix,
    model_matrix,
    purity,
    unsupervised_l1_matrix,
    write_linkage_csv,
)
from mwdmatch.gbdt import TrainConfig
from mwdmatch.lessons import ground_truth_similar

from oracles import average_linkage_oracle


def sim_matrix(values, mode="ground_truth"):
    n = len(values)
    return SimilarityMatrix(np.asarray(values, float), mode, tuple(f"l{i}" for i in range(n)))


class TestSimilarityMatrixType:
    def test_asymmetric_rejected(self):
        with pytest.raises(ValueError):
            sim_matrix([[1.0, 0.2], [0.4, 1.0]])

    def test_unknown_mode_rejected(self):
        with pytest.raises(ValueError):
            sim_matrix(np.eye(2), mode="bogus")


class TestGroundTruthMatrix:
    def test_entries_follow_relation(self, small_db):
        M = ground_truth_matrix(small_db)
        for i, a in enumerate(small_db.lessons):
            for j, b in enumerate(small_db.lessons):
                assert M.values[i, j] == float(ground_truth_similar(a, b))

    def test_identity_when_all_distinct(self, small_db):
        reps = [idxs[0] for idxs in small_db.by_group.values()]
        sub = small_db.subset(reps)
        M = ground_truth_matrix(sub)
        np.testing.assert_array_equal(M.values, np.eye(len(reps)))

    def test_all_ones_single_group(self, small_db):
        group = list(small_db.by_group.values())[0]
        sub = small_db.subset(group)
        M = ground_truth_matrix(sub)
        np.testing.assert_array_equal(M.values, np.ones((len(group), len(group))))


class TestL1Matrix:
    def test_diagonal_is_one(self, small_db):
        M = unsupervised_l1_matrix(small_db)
        np.testing.assert_allclose(np.diag(M.values), 1.0)

    def test_symmetric_and_bounded(self, small_db):
        M = unsupervised_l1_matrix(small_db)
        np.testing.assert_allclose(M.values, M.values.T, atol=1e-12)
        assert (M.values > 0).all() and (M.values <= 1).all()

    def test_depth_channels_excluded(self, small_db):
        from mwdmatch.telemetry import ChannelId

        # weighting only depth channels would leave everything at distance 0;
        # the exclusion means custom weights on depths are ignored
        M1 = unsupervised_l1_matrix(small_db)
        M2 = unsupervised_l1_matrix(
            small_db,
            weights={c: 1.0 for c in small_db.window_config.channels},
        )
        np.testing.assert_allclose(M1.values, M2.values, atol=1e-12)

    def test_hand_computed_two_lessons_one_channel(self, small_db):
        from mwdmatch.telemetry import ChannelId

        sub = small_db.subset([0, 1])
        M = unsupervised_l1_matrix(sub, weights={ChannelId.INPUT_PRESSURE: 1.0})
        a = sub.lessons[0].interval
        b = sub.lessons[1].interval
        va, ma = a.values(ChannelId.INPUT_PRESSURE), a.missing(ChannelId.INPUT_PRESSURE)
        vb, mb = b.values(ChannelId.INPUT_PRESSURE), b.missing(ChannelId.INPUT_PRESSURE)
        both = ~ma & ~mb
        pooled = np.concatenate([va[~ma], vb[~mb]])
        # z-scoring is over the whole database (here: the two lessons)
        mu, sd = pooled.mean(), pooled.std()
        d = np.mean(np.abs((va[both] - mu) / sd - (vb[both] - mu) / sd))
        assert M.values[0, 1] == pytest.approx(1.0 / (1.0 + d), rel=1e-9)


class TestModelMatrix:
    def test_train_mode_symmetric_unit_diagonal(self, small_db, small_model):
        M = model_matrix(small_db, model=small_model, mode="train")
        np.testing.assert_allclose(M.values, M.values.T, atol=1e-12)
        np.testing.assert_allclose(np.diag(M.values), 1.0)
        off = ~np.eye(len(small_db), dtype=bool)
        assert (M.values[off] > 0).all() and (M.values[off] < 1).all()

    def test_train_mode_on_block_beats_off_block(self, small_db, small_model):
        M = model_matrix(small_db, model=small_model, mode="train")
        G = ground_truth_matrix(small_db).values
        off_diag = ~np.eye(len(small_db), dtype=bool)
        on_block = M.values[(G == 1) & off_diag].mean()
        off_block = M.values[(G == 0) & off_diag].mean()
        assert on_block > off_block

    def test_cv_plan_excludes_both_wells(self, small_db):
        plan = cv_fold_plan(small_db, cv_folds=3, seed=2)
        assert plan, "plan should not be empty"
        covered = set()
        for step, train_idx, qa, qb in plan:
            train_wells = {small_db.lessons[i].well_id for i in train_idx}
            for a, b in zip(qa, qb):
                covered.add((int(a), int(b)))
                assert small_db.lessons[a].well_id not in train_wells
                assert small_db.lessons[b].well_id not in train_wells
        n = len(small_db)
        ia, ib = np.triu_indices(n, k=1)
        assert covered == set(zip(ia.tolist(), ib.tolist()))

    def test_cv_mode_runs_and_differs_from_train(self, small_db, small_model):
        cfg = TrainConfig(n_trees=20, max_depth=3, seed=0)
        M_cv = model_matrix(small_db, mode="cv", train_config=cfg, cv_folds=3, seed=0)
        M_tr = model_matrix(small_db, model=small_model, mode="train")
        np.testing.assert_allclose(M_cv.values, M_cv.values.T, atol=1e-12)
        np.testing.assert_allclose(np.diag(M_cv.values), 1.0)
        assert not np.allclose(M_cv.values, M_tr.values)

    def test_train_mode_requires_model(self, small_db):
        with pytest.raises(ValueError):
            model_matrix(small_db, mode="train")


class TestAgglomerate:
    def test_two_items_single_merge(self):
        M = sim_matrix([[1.0, 0.4], [0.4, 1.0]])
        d = agglomerate(M)
        assert d.merges.shape == (1, 4)
        left, right, height, count = d.merges[0]
        assert (left, right, count) == (0, 1, 2)
        assert height == pytest.approx(0.6)

    def test_ground_truth_groups_merge_before_crossing(self, small_db):
        M = ground_truth_matrix(small_db)
        d = agglomerate(M)
        heights = d.merges[:, 2]
        g = len(small_db.by_group)
        n = len(small_db)
        assert (heights[: n - g] == 0).all()
        assert (heights[n - g:] > 0).all()

    def test_matches_from_scratch_oracle(self):
        rng = np.random.default_rng(4)
        for _ in range(10):
            n = int(rng.integers(3, 9))
            S = rng.random((n, n))
            S = (S + S.T) / 2
            np.fill_diagonal(S, 1.0)
            d = agglomerate(sim_matrix(S.clip(0, 1)))
            want = average_linkage_oracle(1.0 - S.clip(0, 1))
            for (gl, gr, gh, gc), (wl, wr, wh, wc) in zip(d.merges, want):
                assert (gl, gr, gc) == (wl, wr, wc)
                assert gh == pytest.approx(wh, abs=1e-9)

    def test_four_item_hand_case(self):
        # two tight pairs (0,1) and (2,3), then the cross merge
        S = np.array([
            [1.0, 0.9, 0.1, 0.2],
            [0.9, 1.0, 0.2, 0.1],
            [0.1, 0.2, 1.0, 0.8],
            [0.2, 0.1, 0.8, 1.0],
        ])
        d = agglomerate(sim_matrix(S))
        assert d.merges[0][:2].tolist() == [0, 1]
        assert d.merges[1][:2].tolist() == [2, 3]
        assert d.merges[2][2] == pytest.approx(1 - 0.15)

    def test_monotone_heights(self, small_db, small_model):
        M = model_matrix(small_db, model=small_model, mode="train")
        d = agglomerate(M)
        assert (np.diff(d.merges[:, 2]) >= -1e-12).all()


class TestCutPurity:
    def _groups(self, db):
        return [(l.accident_type.value, l.operation.value) for l in db.lessons]

    def test_k_equals_n(self, small_db):
        d = agglomerate(ground_truth_matrix(small_db))
        labels = cut(d, len(small_db))
        assert purity(labels, self._groups(small_db)) == 1.0
        assert len(set(labels.tolist())) == len(small_db)

    def test_k_equals_one(self, small_db):
        d = agglomerate(ground_truth_matrix(small_db))
        labels = cut(d, 1)
        groups = self._groups(small_db)
        biggest = max(groups.count(g) for g in set(groups))
        assert purity(labels, groups) == pytest.approx(biggest / len(small_db))

    def test_ground_truth_cut_perfect_purity(self, small_db):
        d = agglomerate(ground_truth_matrix(small_db))
        k = len(small_db.by_group)
        labels = cut(d, k)
        assert purity(labels, self._groups(small_db)) == 1.0

    def test_invalid_k_rejected(self, small_db):
        d = agglomerate(ground_truth_matrix(small_db))
        with pytest.raises(ValueError):
            cut(d, 0)
        with pytest.raises(ValueError):
            cut(d, len(small_db) + 1)

    def test_cluster_count_exact(self, small_db, small_model):
        M = model_matrix(small_db, model=small_model, mode="train")
        d = agglomerate(M)
        for k in (1, 2, 5, len(small_db)):
            assert len(set(cut(d, k).tolist())) == k


def test_linkage_csv(tmp_path, small_db):
    d = agglomerate(ground_truth_matrix(small_db))
    path = tmp_path / "linkage.csv"
    write_linkage_csv(d, path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "left,right,height,count"
    assert len(lines) == len(small_db)  # header + n-1 merges
