#!/usr/bin/env python3
"""Streaming replay: alarms, analogue ranking, and threshold trade-offs.

Every 10 minutes the trailing 2-hour window is scored against the whole
lesson database; when the best similarity clears the threshold, an alarm
fires carrying the top-5 analogues and their majority accident type. Alarms
are then scored against ground truth: a correctly-typed alarm within 4 hours
before / 2 hours after an anchor is a true positive, everything else feeds
the deduplicated false-alarm count. A threshold sweep re-uses the stored
similarity traces, so no model re-scoring is needed.
"""

from mwdmatch import gbdt
from mwdmatch.detector import (
    DetectorConfig,
    SimilarityModel,
    alarms_from_trace,
    rank_analogues,
    replay_trace,
)
from mwdmatch.evaluation import AlarmScoreReport, false_alarms_per_day, score_alarms, threshold_sweep
from mwdmatch.gbdt import TrainConfig
from mwdmatch.lessons import build_pair_dataset, database_from_corpus
from mwdmatch.synthgen import AccidentType, OperationType, generate_corpus

composition = {
    (AccidentType.STUCK, OperationType.DRILLING): 5,
    (AccidentType.WASHOUT, OperationType.DRILLING): 5,
    (AccidentType.MUD_LOSS, OperationType.DRILLING): 5,
    (AccidentType.FLUID_SHOW, OperationType.DRILLING): 5,
}

print("building corpus and model...")
corpus = generate_corpus(seed=31, composition=composition)
db = database_from_corpus(corpus)
X, y, _ = build_pair_dataset(db)
model = gbdt.fit(X, y, TrainConfig(n_trees=120, seed=0),
                 layout_hash=db.window_config.pair_layout_hash())
sim = SimilarityModel(model, db.window_config)

rec = corpus.lessons[0]
series = corpus.well(rec.well_id)
print(f"\nreplaying {series.well_id} ({series.length} ticks = "
      f"{series.length / 360:.0f} h), true {rec.accident_type.value} at tick {rec.anchor_tick}")

cfg = DetectorConfig(threshold=0.7, step_ticks=60)
trace = replay_trace(series, sim, db, cfg)
alarms = alarms_from_trace(trace, series.well_id, cfg.threshold)
print(f"  {len(trace)} scoring points, {len(alarms)} alarms above {cfg.threshold}")
for a in alarms[:5]:
    analogues = ", ".join(f"{t.lesson_id}:{t.similarity:.2f}" for t in a.top5[:3])
    print(f"    tick {a.tick}: sim {a.max_similarity:.3f} votes "
          f"{a.voted_type.value:10s} top analogues [{analogues}]")
if len(alarms) > 5:
    print(f"    ... {len(alarms) - 5} more")

# analogue ranking at the anchor itself
from mwdmatch.telemetry import slice_interval

query = slice_interval(series, rec.anchor_tick - 720, rec.anchor_tick)
ranked = rank_analogues(sim, query, db)
print(f"\ntop-5 analogues for the anchor window:")
for r in ranked[:5]:
    print(f"  {r.lesson_id}: {r.similarity:.3f} ({r.accident_type.value})")

# alarm-level scoring over the whole corpus
print("\nscoring alarms for every well at threshold 0.7...")
traces = {w.well_id: replay_trace(w, sim, db, cfg) for w in corpus.wells}
wells = [
    score_alarms(alarms_from_trace(traces[w.well_id], w.well_id, 0.7),
                 corpus.events_by_well[w.well_id], w.length, w.well_id)
    for w in corpus.wells
]
report = AlarmScoreReport(wells)
print(f"  detected {report.total_tp}/{len(corpus.lessons)} accidents, "
      f"{report.total_fp} false alarms over {report.total_days:.1f} signal-days "
      f"({false_alarms_per_day(report):.2f}/day)")

thresholds = [0.3, 0.5, 0.7, 0.9]
points = threshold_sweep(
    traces,
    {w.well_id: corpus.events_by_well[w.well_id] for w in corpus.wells},
    {w.well_id: w.length for w in corpus.wells},
    thresholds,
)
print("\nthreshold sweep (totals over all wells):")
for p in points:
    print(f"  threshold {p.threshold:.1f}: TP {p.total_tp:2d}  FP {p.total_fp:3d}  "
          f"mean FP/well {p.mean_fp_per_well:.2f}")
