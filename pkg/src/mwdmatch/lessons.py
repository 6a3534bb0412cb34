"""Accident knowledge base: lessons, pair labeling, pair datasets.

A lesson is one past accident: its type, the drilling operation at the
moment of failure, and the 2-hour telemetry window that *precedes* the
anchor tick. Two lessons count as similar exactly when both accident type
and operation coincide - that equality is the ground truth the pair
classifier learns.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

from .features import WindowConfig, interval_features, pair_features_matrix
from .synthgen import AccidentType, OperationType, SyntheticCorpus
from .telemetry import ChannelId, Interval, TelemetrySeries, parse_csv, slice_interval

LESSON_TICKS = 720


@dataclass(frozen=True)
class Lesson:
    lesson_id: str
    well_id: str
    accident_type: AccidentType
    operation: OperationType
    anchor_tick: int
    interval: Interval
    oilfield_id: str = ""

    def __post_init__(self):
        if self.interval.end_tick != self.anchor_tick:
            raise ValueError("lesson interval must end exactly at the anchor tick")
        if self.interval.length != LESSON_TICKS:
            raise ValueError(f"lesson interval must span {LESSON_TICKS} ticks")


def extract_lesson_interval(series: TelemetrySeries, anchor_tick: int) -> Interval:
    """The 2 hours preceding the anchor: [anchor-720, anchor)."""
    if anchor_tick < LESSON_TICKS:
        raise ValueError(
            f"anchor {anchor_tick} too early: a full {LESSON_TICKS}-tick window must precede it"
        )
    return slice_interval(series, anchor_tick - LESSON_TICKS, anchor_tick)


def anchor_tick_for_depth(series: TelemetrySeries, depth: float) -> int:
    """First tick where bit depth reaches `depth` (converts depth-anchored
    lesson records to time anchors at ingestion)."""
    vals = series.values(ChannelId.BIT_DEPTH)
    hit = np.nonzero(~np.isnan(vals) & (vals >= depth))[0]
    if hit.size == 0:
        raise ValueError(f"bit depth never reaches {depth} in well {series.well_id!r}")
    return int(hit[0])


def ground_truth_similar(a: Lesson, b: Lesson) -> bool:
    """True iff accident types and drilling operations both coincide."""
    return a.accident_type == b.accident_type and a.operation == b.operation


class LessonDatabase:
    """Immutable lesson collection with per-lesson cached feature vectors."""

    def __init__(self, lessons: Iterable[Lesson], window_config: WindowConfig = WindowConfig()):
        self.lessons: tuple[Lesson, ...] = tuple(lessons)
        ids = [l.lesson_id for l in self.lessons]
        if len(set(ids)) != len(ids):
            raise ValueError("lesson_ids must be unique")
        self.window_config = window_config
        self._features: Optional[np.ndarray] = None
        self.by_well: dict[str, tuple[int, ...]] = {}
        self.by_group: dict[tuple[AccidentType, OperationType], tuple[int, ...]] = {}
        for i, lesson in enumerate(self.lessons):
            self.by_well.setdefault(lesson.well_id, ())
            self.by_well[lesson.well_id] += (i,)
            key = (lesson.accident_type, lesson.operation)
            self.by_group.setdefault(key, ())
            self.by_group[key] += (i,)

    def __len__(self) -> int:
        return len(self.lessons)

    @property
    def wells(self) -> tuple[str, ...]:
        return tuple(self.by_well)

    @property
    def feature_matrix(self) -> np.ndarray:
        """(n_lessons, n_features) cached interval features."""
        if self._features is None:
            if not self.lessons:
                self._features = np.empty((0, self.window_config.n_features))
            else:
                self._features = np.vstack([
                    interval_features(l.interval, self.window_config) for l in self.lessons
                ])
            self._features.flags.writeable = False
        return self._features

    def subset(self, indices: Iterable[int]) -> "LessonDatabase":
        indices = list(indices)
        sub = LessonDatabase((self.lessons[i] for i in indices), self.window_config)
        if self._features is not None:
            feats = self._features[indices].copy()
            feats.flags.writeable = False
            sub._features = feats
        return sub


def build_pair_dataset(
    db: LessonDatabase,
) -> tuple[np.ndarray, np.ndarray, list[tuple[str, str]]]:
    """All unordered lesson pairs: pair-feature matrix, binary labels, and the
    (lesson_id, lesson_id) index for traceability. n lessons -> n(n-1)/2 rows."""
    n = len(db)
    if n < 2:
        raise ValueError("need at least 2 lessons to build pairs")
    ia, ib = np.triu_indices(n, k=1)
    feats = db.feature_matrix
    X = pair_features_matrix(feats[ia], feats[ib])
    y = np.array(
        [1 if ground_truth_similar(db.lessons[a], db.lessons[b]) else 0 for a, b in zip(ia, ib)],
        dtype=np.int8,
    )
    index = [(db.lessons[a].lesson_id, db.lessons[b].lesson_id) for a, b in zip(ia, ib)]
    return X, y, index


def pair_dataset_between(
    db_a: LessonDatabase, db_b: LessonDatabase
) -> tuple[np.ndarray, np.ndarray]:
    """Cross pairs (a in db_a) x (b in db_b); used by leave-one-well-out CV."""
    na, nb = len(db_a), len(db_b)
    if na == 0 or nb == 0:
        raise ValueError("both databases must be non-empty")
    ia = np.repeat(np.arange(na), nb)
    ib = np.tile(np.arange(nb), na)
    X = pair_features_matrix(db_a.feature_matrix[ia], db_b.feature_matrix[ib])
    y = np.array(
        [1 if ground_truth_similar(db_a.lessons[a], db_b.lessons[b]) else 0 for a, b in zip(ia, ib)],
        dtype=np.int8,
    )
    return X, y


# --- manifest I/O --------------------------------------------------------------


def load_manifest(
    path: str | Path,
    window_config: WindowConfig = WindowConfig(),
) -> LessonDatabase:
    """Read a lesson manifest (JSON array) and the telemetry it references.

    Telemetry paths are relative to the manifest. Records may carry
    `anchor_depth` instead of `anchor_tick`; depth anchors are converted via
    the bit-depth channel. A dangling telemetry reference raises.
    """
    path = Path(path)
    with path.open() as fh:
        records = json.load(fh)
    if not isinstance(records, list):
        raise ValueError(f"{path}: manifest must be a JSON array of lesson records")
    series_cache: dict[str, TelemetrySeries] = {}
    lessons = []
    for rec in records:
        rel = rec["telemetry_file"]
        if rel not in series_cache:
            tele_path = path.parent / rel
            if not tele_path.exists():
                raise FileNotFoundError(
                    f"{path}: lesson {rec.get('lesson_id')!r} references missing telemetry "
                    f"file {tele_path}"
                )
            series_cache[rel] = parse_csv(tele_path, well_id=rec["well_id"])
        series = series_cache[rel]
        if "anchor_tick" in rec:
            anchor = int(rec["anchor_tick"])
        elif "anchor_depth" in rec:
            anchor = anchor_tick_for_depth(series, float(rec["anchor_depth"]))
        else:
            raise ValueError(f"{path}: lesson {rec.get('lesson_id')!r} lacks an anchor")
        lessons.append(Lesson(
            lesson_id=rec["lesson_id"],
            well_id=rec["well_id"],
            accident_type=AccidentType(rec["accident_type"]),
            operation=OperationType(rec["operation"]),
            anchor_tick=anchor,
            interval=extract_lesson_interval(series, anchor),
            oilfield_id=rec.get("oilfield_id", ""),
        ))
    return LessonDatabase(lessons, window_config)


def save_manifest(db: LessonDatabase, path: str | Path) -> None:
    """Write the manifest array. Telemetry files are assumed to live at
    telemetry/<well_id>.csv relative to the manifest (the corpus layout)."""
    records = []
    for lesson in db.lessons:
        rec = {
            "lesson_id": lesson.lesson_id,
            "well_id": lesson.well_id,
            "accident_type": lesson.accident_type.value,
            "operation": lesson.operation.value,
            "anchor_tick": lesson.anchor_tick,
            "telemetry_file": f"telemetry/{lesson.well_id}.csv",
        }
        if lesson.oilfield_id:
            rec["oilfield_id"] = lesson.oilfield_id
        records.append(rec)
    with Path(path).open("w") as fh:
        json.dump(records, fh, indent=2)


def database_from_corpus(
    corpus: SyntheticCorpus, window_config: WindowConfig = WindowConfig()
) -> LessonDatabase:
    """Build a LessonDatabase directly from an in-memory synthetic corpus."""
    by_id = {w.well_id: w for w in corpus.wells}
    lessons = [
        Lesson(
            lesson_id=rec.lesson_id,
            well_id=rec.well_id,
            accident_type=rec.accident_type,
            operation=rec.operation,
            anchor_tick=rec.anchor_tick,
            interval=extract_lesson_interval(by_id[rec.well_id], rec.anchor_tick),
            oilfield_id="SYNTH",
        )
        for rec in corpus.lessons
    ]
    return LessonDatabase(lessons, window_config)
