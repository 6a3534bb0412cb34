import numpy as np
import pytest

from mwdmatch.detector import (
    Alarm,
    DetectorConfig,
    RankedAnalogue,
    SimilarityModel,
    alarms_from_trace,
    max_similarity,
    rank_analogues,
    read_alarm_csv,
    replay,
    replay_trace,
    score_pair,
    top5_vote,
    write_alarm_csv,
)
from mwdmatch.gbdt import GbdtModel
from mwdmatch.synthgen import AccidentType
from mwdmatch.telemetry import slice_interval

from test_telemetry import make_series


def ra(lesson_id, sim, accident=AccidentType.STUCK):
    return RankedAnalogue(lesson_id, sim, accident)


class TestScorePair:
    def test_symmetry_under_role_swap(self, small_sim, small_db):
        a, b = small_db.lessons[0], small_db.lessons[4]
        s1 = score_pair(small_sim, a.interval, b)
        s2 = score_pair(small_sim, b.interval, a)
        assert s1 == pytest.approx(s2, abs=1e-12)

    def test_self_pair_scores_high(self, small_sim, small_db):
        lesson = small_db.lessons[0]
        assert score_pair(small_sim, lesson.interval, lesson) > 0.7

    def test_zero_tree_model_scores_half(self, small_db):
        flat = GbdtModel(base_score=0.0, learning_rate=0.1, trees=[],
                         n_features=small_db.window_config.n_pair_features)
        sim = SimilarityModel(flat, small_db.window_config)
        lesson = small_db.lessons[0]
        assert score_pair(sim, lesson.interval, lesson) == pytest.approx(0.5)

    def test_wrong_length_rejected(self, small_sim, small_db):
        s = make_series(1000)
        with pytest.raises(ValueError):
            score_pair(small_sim, slice_interval(s, 0, 719), small_db.lessons[0])

    def test_layout_hash_mismatch_rejected(self, small_model):
        from mwdmatch.features import WindowConfig

        other = WindowConfig(window_ticks=(720, 180))
        with pytest.raises(ValueError, match="layout"):
            SimilarityModel(small_model, other)


class TestRankAnalogues:
    def test_output_shape_and_order(self, small_sim, small_db):
        q = small_db.lessons[3].interval
        ranked = rank_analogues(small_sim, q, small_db)
        assert len(ranked) == len(small_db)
        sims = [r.similarity for r in ranked]
        assert sims == sorted(sims, reverse=True)

    def test_self_ranks_first(self, small_sim, small_db):
        lesson = small_db.lessons[5]
        ranked = rank_analogues(small_sim, lesson.interval, small_db)
        assert ranked[0].lesson_id == lesson.lesson_id

    def test_permutation_invariance(self, small_sim, small_db):
        q = small_db.lessons[2].interval
        base = rank_analogues(small_sim, q, small_db)
        rng = np.random.default_rng(3)
        order = rng.permutation(len(small_db))
        shuffled = small_db.subset(order.tolist())
        again = rank_analogues(small_sim, q, shuffled)
        assert [r.lesson_id for r in base] == [r.lesson_id for r in again]

    def test_singleton_db(self, small_sim, small_db):
        single = small_db.subset([0])
        ranked = rank_analogues(small_sim, small_db.lessons[0].interval, single)
        assert len(ranked) == 1

    def test_empty_db_rejected(self, small_sim, small_db):
        with pytest.raises(ValueError):
            rank_analogues(small_sim, small_db.lessons[0].interval, small_db.subset([]))

    def test_max_similarity_matches_rank_head(self, small_sim, small_db):
        q = small_db.lessons[1].interval
        assert max_similarity(small_sim, q, small_db) == pytest.approx(
            rank_analogues(small_sim, q, small_db)[0].similarity
        )


class TestTop5Vote:
    def test_clear_majority(self):
        ranked = [ra("a", .9), ra("b", .8), ra("c", .7, AccidentType.WASHOUT),
                  ra("d", .6), ra("e", .5, AccidentType.MUD_LOSS)]
        assert top5_vote(ranked) == AccidentType.STUCK

    def test_tie_broken_by_summed_similarity(self):
        ranked = [ra("a", .9, AccidentType.WASHOUT), ra("b", .9, AccidentType.WASHOUT),
                  ra("c", .8, AccidentType.STUCK), ra("d", .7, AccidentType.STUCK)]
        assert top5_vote(ranked) == AccidentType.WASHOUT
        ranked2 = [ra("a", .9, AccidentType.WASHOUT), ra("b", .5, AccidentType.WASHOUT),
                   ra("c", .8, AccidentType.STUCK), ra("d", .7, AccidentType.STUCK)]
        assert top5_vote(ranked2) == AccidentType.STUCK

    def test_last_resort_enum_order(self):
        ranked = [ra("a", .8, AccidentType.WASHOUT), ra("b", .8, AccidentType.STUCK)]
        assert top5_vote(ranked) == AccidentType.STUCK  # earlier in enum order

    def test_single_entry(self):
        assert top5_vote([ra("a", .4, AccidentType.FLUID_SHOW)]) == AccidentType.FLUID_SHOW

    def test_only_top_five_counted(self):
        ranked = [ra(f"w{i}", .9 - i * .01, AccidentType.WASHOUT) for i in range(5)]
        ranked += [ra(f"s{i}", .5 - i * .01, AccidentType.STUCK) for i in range(10)]
        assert top5_vote(ranked) == AccidentType.WASHOUT

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            top5_vote([])


class TestReplay:
    def test_short_series_rejected(self, small_sim, small_db):
        with pytest.raises(ValueError, match="shorter"):
            replay(make_series(700), small_sim, small_db)

    def test_single_point_on_720_series(self, small_sim, small_db, small_corpus):
        series = small_corpus.wells[0]
        from mwdmatch.telemetry import TelemetrySeries, ChannelData, ChannelId

        chans = {c: ChannelData(series.values(c)[:720].copy(),
                                series.missing(c)[:720].copy()) for c in ChannelId}
        short = TelemetrySeries(well_id="short", start_time=series.start_time, channels=chans)
        trace = replay_trace(short, small_sim, small_db)
        assert [p.tick for p in trace] == [720]

    def test_trace_ticks_follow_stride(self, small_sim, small_db, small_corpus):
        series = small_corpus.wells[0]
        trace = replay_trace(series, small_sim, small_db, DetectorConfig(step_ticks=240))
        assert [p.tick for p in trace] == list(range(720, series.length + 1, 240))

    def test_alarms_filtered_by_threshold(self, small_sim, small_db, small_corpus):
        series = small_corpus.wells[0]
        trace = replay_trace(series, small_sim, small_db, DetectorConfig(step_ticks=120))
        for theta in (0.3, 0.7, 0.9):
            alarms = alarms_from_trace(trace, series.well_id, theta)
            assert all(a.max_similarity > theta for a in alarms)
            expected = [p.tick for p in trace if p.max_similarity > theta]
            assert [a.tick for a in alarms] == expected

    def test_threshold_monotone_subsets(self, small_sim, small_db, small_corpus):
        series = small_corpus.wells[1]
        trace = replay_trace(series, small_sim, small_db, DetectorConfig(step_ticks=120))
        lo = {a.tick for a in alarms_from_trace(trace, "w", 0.5)}
        hi = {a.tick for a in alarms_from_trace(trace, "w", 0.8)}
        assert hi <= lo

    def test_causality_prefix_invariance(self, small_sim, small_db, small_corpus):
        series = small_corpus.wells[2]
        cut = 2160
        from mwdmatch.telemetry import TelemetrySeries, ChannelData, ChannelId

        chans = {c: ChannelData(series.values(c)[:cut].copy(),
                                series.missing(c)[:cut].copy()) for c in ChannelId}
        prefix = TelemetrySeries(well_id=series.well_id, start_time=series.start_time,
                                 channels=chans)
        cfg = DetectorConfig(step_ticks=120)
        full = [p for p in replay_trace(series, small_sim, small_db, cfg) if p.tick <= cut]
        part = replay_trace(prefix, small_sim, small_db, cfg)
        assert [(p.tick, p.max_similarity) for p in full] == [
            (p.tick, p.max_similarity) for p in part
        ]

    def test_detects_own_lesson_in_tp_window(self, small_sim, small_db, small_corpus):
        rec = small_corpus.lessons[0]
        series = small_corpus.well(rec.well_id)
        alarms = replay(series, small_sim, small_db, DetectorConfig(threshold=0.7))
        a = rec.anchor_tick
        in_window = [al for al in alarms if a - 1440 <= al.tick <= a + 720]
        assert in_window
        assert any(al.voted_type == rec.accident_type for al in in_window)


class TestAlarmCsv:
    def test_round_trip(self, small_sim, small_db, small_corpus, tmp_path):
        series = small_corpus.wells[0]
        alarms = replay(series, small_sim, small_db,
                        DetectorConfig(threshold=0.5, step_ticks=120))
        assert alarms, "fixture should produce alarms"
        path = tmp_path / "alarms.csv"
        write_alarm_csv(alarms, series, path)
        back = read_alarm_csv(path, small_db)
        assert len(back) == len(alarms)
        for a, b in zip(alarms, back):
            assert (a.well_id, a.tick, a.voted_type) == (b.well_id, b.tick, b.voted_type)
            assert a.max_similarity == b.max_similarity
            assert [t.lesson_id for t in a.top5] == [t.lesson_id for t in b.top5]

    def test_alarm_invariants(self):
        with pytest.raises(ValueError):
            Alarm("w", 10, 0.5, (ra("a", 0.4), ra("b", 0.6)), AccidentType.STUCK)
        with pytest.raises(ValueError):
            Alarm("w", 10, 0.9, (ra("a", 0.5),), AccidentType.STUCK)

    def test_detector_config_validation(self):
        with pytest.raises(ValueError):
            DetectorConfig(threshold=0.0)
        with pytest.raises(ValueError):
            DetectorConfig(step_ticks=0)
