"""Real-time analogues search over a lesson database.

Every `step_ticks` the trailing 2-hour window is scored against each lesson;
when the best similarity clears the threshold an alarm is emitted carrying
the top-5 analogues and the accident type they vote for. Scoring at tick t
uses only data in [t-720, t) - no lookahead.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .features import WindowConfig, interval_features, pair_features, pair_features_matrix
from .gbdt import GbdtModel
from .lessons import Lesson, LessonDatabase
from .synthgen import AccidentType
from .telemetry import Interval, TelemetrySeries, slice_interval

WINDOW_TICKS = 720


@dataclass(frozen=True)
class DetectorConfig:
    threshold: float = 0.7
    step_ticks: int = 60  # score every 10 minutes

    def __post_init__(self):
        if not 0.0 < self.threshold < 1.0:
            raise ValueError("threshold must lie in (0, 1)")
        if self.step_ticks < 1:
            raise ValueError("step_ticks must be >= 1")


@dataclass(frozen=True)
class SimilarityModel:
    """A trained scorer plus the feature layout it was trained on."""

    gbdt: GbdtModel
    window_config: WindowConfig

    def __post_init__(self):
        expected = self.window_config.pair_layout_hash()
        if self.gbdt.layout_hash and self.gbdt.layout_hash != expected:
            raise ValueError(
                "model layout hash does not match the window configuration"
            )


@dataclass(frozen=True)
class RankedAnalogue:
    lesson_id: str
    similarity: float
    accident_type: AccidentType


@dataclass(frozen=True)
class Alarm:
    well_id: str
    tick: int
    max_similarity: float
    top5: tuple[RankedAnalogue, ...]
    voted_type: AccidentType

    def __post_init__(self):
        sims = [a.similarity for a in self.top5]
        if sims != sorted(sims, reverse=True):
            raise ValueError("top5 must be sorted by similarity, descending")
        if sims and self.max_similarity != sims[0]:
            raise ValueError("max_similarity must equal the best analogue's similarity")


@dataclass(frozen=True)
class ScorePoint:
    """One scoring instant of a replay: enough to re-threshold later without
    touching the model again."""

    tick: int
    max_similarity: float
    top5: tuple[RankedAnalogue, ...]
    voted_type: AccidentType


def score_pair(
    model: SimilarityModel,
    query: Interval,
    lesson: Lesson,
    lesson_features: Optional[np.ndarray] = None,
) -> float:
    """Similarity of a query window to one lesson, in [0, 1]."""
    if query.length != WINDOW_TICKS:
        raise ValueError(f"query interval must span {WINDOW_TICKS} ticks")
    qf = interval_features(query, model.window_config)
    lf = (
        lesson_features
        if lesson_features is not None
        else interval_features(lesson.interval, model.window_config)
    )
    return float(model.gbdt.predict_score(pair_features(qf, lf)))


def _scores_against_db(model: SimilarityModel, qf: np.ndarray, db: LessonDatabase) -> np.ndarray:
    Q = np.broadcast_to(qf, (len(db), qf.shape[0]))
    X = pair_features_matrix(Q, db.feature_matrix)
    return model.gbdt.predict_score(X)


def rank_analogues(
    model: SimilarityModel, query: Interval, db: LessonDatabase
) -> list[RankedAnalogue]:
    """All lessons scored against the query, sorted by descending similarity;
    ties broken by lesson_id ascending, so database order never matters."""
    if len(db) == 0:
        raise ValueError("lesson database is empty")
    if query.length != WINDOW_TICKS:
        raise ValueError(f"query interval must span {WINDOW_TICKS} ticks")
    qf = interval_features(query, model.window_config)
    scores = _scores_against_db(model, qf, db)
    order = sorted(range(len(db)), key=lambda i: (-scores[i], db.lessons[i].lesson_id))
    return [
        RankedAnalogue(db.lessons[i].lesson_id, float(scores[i]), db.lessons[i].accident_type)
        for i in order
    ]


def max_similarity(model: SimilarityModel, query: Interval, db: LessonDatabase) -> float:
    """Best similarity of the query against any lesson in the database."""
    if len(db) == 0:
        raise ValueError("lesson database is empty")
    if query.length != WINDOW_TICKS:
        raise ValueError(f"query interval must span {WINDOW_TICKS} ticks")
    qf = interval_features(query, model.window_config)
    return float(np.max(_scores_against_db(model, qf, db)))


def top5_vote(ranked: Sequence[RankedAnalogue]) -> AccidentType:
    """Majority accident type among the top min(5, n) analogues. Ties go to
    the type with the greater summed similarity, then enum order."""
    if not ranked:
        raise ValueError("cannot vote on an empty ranking")
    top = ranked[: min(5, len(ranked))]
    counts: dict[AccidentType, int] = {}
    sums: dict[AccidentType, float] = {}
    for a in top:
        counts[a.accident_type] = counts.get(a.accident_type, 0) + 1
        sums[a.accident_type] = sums.get(a.accident_type, 0.0) + a.similarity
    enum_order = {t: i for i, t in enumerate(AccidentType)}
    return min(
        counts,
        key=lambda t: (-counts[t], -sums[t], enum_order[t]),
    )


def replay_trace(
    series: TelemetrySeries,
    model: SimilarityModel,
    db: LessonDatabase,
    config: DetectorConfig = DetectorConfig(),
) -> list[ScorePoint]:
    """Score the trailing window at every stride point of the series.

    The trace is threshold-free: pair it with `alarms_from_trace` to derive
    alarm lists at any threshold without re-scoring the model.
    """
    if series.length < WINDOW_TICKS:
        raise ValueError(
            f"series of {series.length} ticks is shorter than one {WINDOW_TICKS}-tick window"
        )
    if len(db) == 0:
        raise ValueError("lesson database is empty")
    points = []
    for t in range(WINDOW_TICKS, series.length + 1, config.step_ticks):
        query = slice_interval(series, t - WINDOW_TICKS, t)
        ranked = rank_analogues(model, query, db)
        top5 = tuple(ranked[: min(5, len(ranked))])
        points.append(ScorePoint(
            tick=t,
            max_similarity=top5[0].similarity,
            top5=top5,
            voted_type=top5_vote(ranked),
        ))
    return points


def alarms_from_trace(
    trace: Sequence[ScorePoint], well_id: str, threshold: float
) -> list[Alarm]:
    """Alarms = trace points whose best similarity exceeds the threshold."""
    return [
        Alarm(
            well_id=well_id,
            tick=p.tick,
            max_similarity=p.max_similarity,
            top5=p.top5,
            voted_type=p.voted_type,
        )
        for p in trace
        if p.max_similarity > threshold
    ]


def replay(
    series: TelemetrySeries,
    model: SimilarityModel,
    db: LessonDatabase,
    config: DetectorConfig = DetectorConfig(),
) -> list[Alarm]:
    """Streaming replay: ordered alarms where similarity exceeds the threshold."""
    trace = replay_trace(series, model, db, config)
    return alarms_from_trace(trace, series.well_id, config.threshold)


# --- alarm log CSV ---------------------------------------------------------------

ALARM_CSV_HEADER = [
    "well_id", "tick", "time", "max_similarity", "voted_type",
    "top5_lesson_ids", "top5_similarities",
]


def write_alarm_csv(alarms: Iterable[Alarm], series: TelemetrySeries, path: str | Path) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(ALARM_CSV_HEADER)
        for alarm in alarms:
            writer.writerow([
                alarm.well_id,
                alarm.tick,
                series.tick_time(alarm.tick).isoformat(),
                repr(alarm.max_similarity),
                alarm.voted_type.value,
                "|".join(a.lesson_id for a in alarm.top5),
                "|".join(repr(a.similarity) for a in alarm.top5),
            ])


def read_alarm_csv(path: str | Path, db: Optional[LessonDatabase] = None) -> list[Alarm]:
    """Read an alarm log back. Analogue accident types are restored from the
    database when given, otherwise set to the voted type."""
    types_by_lesson = (
        {l.lesson_id: l.accident_type for l in db.lessons} if db is not None else {}
    )
    alarms = []
    with Path(path).open(newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            voted = AccidentType(row["voted_type"])
            ids = row["top5_lesson_ids"].split("|") if row["top5_lesson_ids"] else []
            sims = [float(s) for s in row["top5_similarities"].split("|")] if row["top5_similarities"] else []
            top5 = tuple(
                RankedAnalogue(lid, sim, types_by_lesson.get(lid, voted))
                for lid, sim in zip(ids, sims)
            )
            alarms.append(Alarm(
                well_id=row["well_id"],
                tick=int(row["tick"]),
                max_similarity=float(row["max_similarity"]),
                top5=top5,
                voted_type=voted,
            ))
    return alarms
