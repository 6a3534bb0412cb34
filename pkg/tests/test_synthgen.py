import json

import numpy as np
import pytest

from mwdmatch.synthgen import (
    TABLE1_COMPOSITION,
    AccidentType,
    GroundTruthEvent,
    OperationType,
    WellPlan,
    baseline_window_starts,
    generate_corpus,
    generate_well,
    load_events,
    save_corpus,
    signature_fires,
)
from mwdmatch.telemetry import ChannelId


def plan_for(accident=AccidentType.WASHOUT, operation=OperationType.DRILLING,
             seed=21, anchor=2880, duration=4320):
    schedule = (
        (OperationType.TRIPPING_IN, 0, anchor - 1560),
        (operation, anchor - 1560, anchor + 840),
        (OperationType.CLEANING, anchor + 840, duration),
    )
    accidents = ((accident, anchor),) if accident is not None else ()
    return WellPlan(well_id="T1", seed=seed, duration_ticks=duration,
                    schedule=schedule, accidents=accidents)


class TestWellPlan:
    def test_schedule_must_cover_duration(self):
        with pytest.raises(ValueError):
            WellPlan("w", 1, 100, schedule=((OperationType.DRILLING, 0, 50),))

    def test_schedule_must_be_contiguous(self):
        with pytest.raises(ValueError):
            WellPlan("w", 1, 100, schedule=(
                (OperationType.DRILLING, 0, 40), (OperationType.CLEANING, 50, 100)))

    def test_anchor_needs_full_window_before(self):
        with pytest.raises(ValueError, match="lesson window"):
            WellPlan("w", 1, 4320,
                     schedule=((OperationType.DRILLING, 0, 4320),),
                     accidents=((AccidentType.STUCK, 500),))

    def test_anchor_within_duration(self):
        with pytest.raises(ValueError):
            WellPlan("w", 1, 1000,
                     schedule=((OperationType.DRILLING, 0, 1000),),
                     accidents=((AccidentType.STUCK, 1500),))

    def test_operation_lookup(self):
        plan = plan_for()
        assert plan.operation_at(0) == OperationType.TRIPPING_IN
        assert plan.operation_at(2879) == OperationType.DRILLING


class TestGenerateWell:
    def test_deterministic_bitwise(self):
        plan = plan_for()
        s1, e1 = generate_well(plan)
        s2, e2 = generate_well(plan)
        assert e1 == e2
        for c in ChannelId:
            np.testing.assert_array_equal(s1.values(c), s2.values(c))
            np.testing.assert_array_equal(s1.missing(c), s2.missing(c))

    def test_no_accidents_empty_events(self):
        _, events = generate_well(plan_for(accident=None))
        assert events == []

    def test_events_carry_type_operation_anchor(self):
        _, events = generate_well(plan_for())
        assert events == [GroundTruthEvent(AccidentType.WASHOUT, OperationType.DRILLING, 2880)]

    def test_all_channels_present_and_sized(self):
        series, _ = generate_well(plan_for())
        assert series.length == 4320
        assert set(series.channels) == set(ChannelId)

    def test_washout_pressure_drops_at_constant_flow(self):
        # sustained pressure decrease while flow stays flat within noise
        plan = plan_for(accident=AccidentType.WASHOUT)
        series, _ = generate_well(plan)
        a = 2880
        pressure = series.values(ChannelId.INPUT_PRESSURE)
        flow = series.values(ChannelId.INPUT_FLOW)

        def drift(x):
            t = np.arange(720.0)
            obs = ~np.isnan(x)
            tc = t[obs] - t[obs].mean()
            return float(np.dot(tc, x[obs] - x[obs].mean()) / np.dot(tc, tc)) * 719

        from mwdmatch.synthgen import NOISE_STD
        p_win = pressure[a - 720:a]
        f_win = flow[a - 720:a]
        assert drift(p_win) < -1.0 * NOISE_STD[ChannelId.INPUT_PRESSURE]
        assert abs(drift(f_win)) < 2.0 * NOISE_STD[ChannelId.INPUT_FLOW]

    def test_drilling_bit_depth_monotone(self):
        plan = plan_for(accident=None)
        series, _ = generate_well(plan, gap_rate=0.0)
        bit = series.values(ChannelId.BIT_DEPTH)
        seg = bit[1400:2800]  # inside the drilling segment (after run-in)
        # monotone apart from the additive noise wiggle
        assert seg[-1] - seg[0] > 10.0

    def test_gap_rate_zero_gives_no_missing(self):
        series, _ = generate_well(plan_for(), gap_rate=0.0)
        for c in ChannelId:
            assert not series.missing(c).any()


class TestSignatureSeparability:
    @pytest.mark.parametrize("accident,operation", sorted(
        {(a, o) for (a, o) in TABLE1_COMPOSITION}, key=lambda t: (t[0].value, t[1].value)
    ))
    def test_detector_fires_in_window_not_in_baseline(self, accident, operation):
        hits = 0
        n = 6
        rng = np.random.default_rng(hash((accident.value, operation.value)) % 2**32)
        for k in range(n):
            plan = plan_for(accident=accident, operation=operation,
                            seed=int(rng.integers(0, 2**62)))
            series, _ = generate_well(plan)
            fired = signature_fires(accident, series, 2880 - 720)
            silent = not any(
                signature_fires(accident, series, s) for s in baseline_window_starts(plan)
            )
            hits += fired and silent
        assert hits >= round(0.9 * n)


class TestGenerateCorpus:
    def test_default_composition_has_94_lessons(self):
        corpus = generate_corpus(seed=1)
        assert len(corpus.lessons) == 94
        assert len(corpus.wells) == 94

    def test_table_counts_match_exactly(self):
        corpus = generate_corpus(seed=1)
        counts = {}
        for rec in corpus.lessons:
            counts[(rec.accident_type, rec.operation)] = counts.get(
                (rec.accident_type, rec.operation), 0) + 1
        assert counts == TABLE1_COMPOSITION

    def test_single_cell_composition(self):
        comp = {(AccidentType.STUCK, OperationType.TRIPPING_IN): 18}
        corpus = generate_corpus(seed=2, composition=comp)
        assert len(corpus.lessons) == 18
        assert all(r.accident_type == AccidentType.STUCK for r in corpus.lessons)
        assert all(r.operation == OperationType.TRIPPING_IN for r in corpus.lessons)

    def test_empty_composition(self):
        corpus = generate_corpus(seed=3, composition={})
        assert corpus.lessons == []
        assert corpus.wells == []

    def test_negative_count_rejected(self):
        with pytest.raises(ValueError, match="negative"):
            generate_corpus(seed=1, composition={
                (AccidentType.STUCK, OperationType.DRILLING): -1})

    def test_determinism_across_calls(self):
        c1 = generate_corpus(seed=5, composition={
            (AccidentType.MUD_LOSS, OperationType.DRILLING): 3})
        c2 = generate_corpus(seed=5, composition={
            (AccidentType.MUD_LOSS, OperationType.DRILLING): 3})
        assert [r.to_json() for r in c1.lessons] == [r.to_json() for r in c2.lessons]
        for w1, w2 in zip(c1.wells, c2.wells):
            for c in ChannelId:
                np.testing.assert_array_equal(w1.values(c), w2.values(c))

    def test_normal_wells_have_no_lessons(self):
        corpus = generate_corpus(seed=6, composition={}, normal_wells=2)
        assert len(corpus.wells) == 2
        assert corpus.lessons == []
        assert all(corpus.events_by_well[w.well_id] == [] for w in corpus.wells)

    def test_normal_mode_composition_cell(self):
        corpus = generate_corpus(seed=6, composition={
            (AccidentType.NORMAL_MODE, OperationType.DRILLING): 2})
        assert len(corpus.wells) == 2
        assert corpus.lessons == []


class TestCorpusFiles:
    def test_save_and_reload_events(self, tmp_path):
        corpus = generate_corpus(seed=8, composition={
            (AccidentType.FLUID_SHOW, OperationType.DRILLING): 2})
        manifest = save_corpus(corpus, tmp_path)
        assert manifest.exists()
        events = load_events(tmp_path / "events.json")
        assert set(events) == {w.well_id for w in corpus.wells}
        info = events[corpus.wells[0].well_id]
        assert info["events"] == corpus.events_by_well[corpus.wells[0].well_id]
        assert info["duration_ticks"] == corpus.wells[0].length

    def test_manifest_schema(self, tmp_path):
        corpus = generate_corpus(seed=8, composition={
            (AccidentType.STUCK, OperationType.DRILLING): 1})
        save_corpus(corpus, tmp_path)
        records = json.loads((tmp_path / "manifest.json").read_text())
        assert isinstance(records, list) and len(records) == 1
        assert set(records[0]) == {
            "lesson_id", "well_id", "accident_type", "operation",
            "anchor_tick", "telemetry_file",
        }
        assert (tmp_path / records[0]["telemetry_file"]).exists()

    def test_save_twice_byte_identical(self, tmp_path):
        comp = {(AccidentType.WASHOUT, OperationType.DRILLING): 2}
        d1 = tmp_path / "a"
        d2 = tmp_path / "b"
        save_corpus(generate_corpus(seed=9, composition=comp), d1)
        save_corpus(generate_corpus(seed=9, composition=comp), d2)
        for f1 in sorted(d1.rglob("*")):
            if f1.is_file():
                f2 = d2 / f1.relative_to(d1)
                assert f1.read_bytes() == f2.read_bytes(), f1.name
