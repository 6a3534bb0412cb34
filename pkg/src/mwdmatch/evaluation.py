"""Quantitative assessment: pair-classification metrics, well-disjoint
cross-validation, alarm-level TP/FP scoring, and threshold sweeps.

Alarm scoring rules: an accident counts as detected (TP = 1, at most once)
when some alarm falls within 4 hours before to 2 hours after its anchor
*and* that alarm votes the accident's type. Every other alarm - outside all
such windows, or in-window with the wrong voted type - is a false-alarm
candidate; candidates within an hour of the previously counted false alarm
collapse into it. False alarms are attributed to their voted type.
"""

from __future__ import annotations

import csv
import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional, Sequence

import numpy as np

from . import gbdt
from .detector import Alarm, ScorePoint, alarms_from_trace
from .gbdt import GbdtModel, TrainConfig
from .lessons import LessonDatabase, build_pair_dataset, pair_dataset_between
from .synthgen import ACCIDENT_TYPES, AccidentType, GroundTruthEvent

TP_WINDOW_BEFORE = 1440  # 4 hours
TP_WINDOW_AFTER = 720    # 2 hours
FP_DEDUP_TICKS = 360     # 1 hour
TICKS_PER_DAY = 8640


# --- confusion matrix ------------------------------------------------------------


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    fn: int
    tn: int

    def __post_init__(self):
        if min(self.tp, self.fp, self.fn, self.tn) < 0:
            raise ValueError("counts must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    def as_table(self) -> list[list[int]]:
        """Rows: True = 1, True = 0; columns: Predicted = 1, Predicted = 0."""
        return [[self.tp, self.fn], [self.fp, self.tn]]

    def as_dict(self) -> dict[str, int]:
        return {"tp": self.tp, "fp": self.fp, "fn": self.fn, "tn": self.tn}


def confusion_at(labels: np.ndarray, scores: np.ndarray, threshold: float) -> ConfusionMatrix:
    labels, scores = _check_labels_scores(labels, scores)
    pred = scores > threshold
    pos = labels == 1
    return ConfusionMatrix(
        tp=int(np.sum(pos & pred)),
        fp=int(np.sum(~pos & pred)),
        fn=int(np.sum(pos & ~pred)),
        tn=int(np.sum(~pos & ~pred)),
    )


def _check_labels_scores(labels, scores) -> tuple[np.ndarray, np.ndarray]:
    labels = np.asarray(labels).ravel()
    scores = np.asarray(scores, dtype=np.float64).ravel()
    if labels.shape != scores.shape:
        raise ValueError("labels and scores must have equal length")
    if not np.all(np.isin(labels, (0, 1))):
        raise ValueError("labels must be binary")
    return labels.astype(np.int64), scores


# --- ROC / PR curves -------------------------------------------------------------


def _tie_grouped_counts(labels: np.ndarray, scores: np.ndarray):
    """Cumulative TP/FP at each distinct score, descending."""
    order = np.argsort(-scores, kind="stable")
    s = scores[order]
    l = labels[order]
    last_of_group = np.r_[np.nonzero(np.diff(s))[0], len(s) - 1]
    tps = np.cumsum(l)[last_of_group]
    fps = np.cumsum(1 - l)[last_of_group]
    return tps, fps, s[last_of_group]


def roc_curve(labels, scores) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(FPR, TPR, thresholds) over all distinct scores plus the (0, 0) origin;
    the final point is always (1, 1)."""
    labels, scores = _check_labels_scores(labels, scores)
    P = int(labels.sum())
    N = len(labels) - P
    if P == 0 or N == 0:
        raise ValueError("ROC requires both classes")
    tps, fps, thr = _tie_grouped_counts(labels, scores)
    fpr = np.r_[0.0, fps / N]
    tpr = np.r_[0.0, tps / P]
    thresholds = np.r_[np.inf, thr]
    return fpr, tpr, thresholds


def roc_auc(labels, scores) -> float:
    fpr, tpr, _ = roc_curve(labels, scores)
    return float(np.trapezoid(tpr, fpr))


def pr_curve(labels, scores) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(recall, precision, thresholds) over all distinct scores, descending."""
    labels, scores = _check_labels_scores(labels, scores)
    P = int(labels.sum())
    if P == 0:
        raise ValueError("PR requires at least one positive")
    tps, fps, thr = _tie_grouped_counts(labels, scores)
    recall = tps / P
    precision = tps / (tps + fps)
    return recall, precision, thr


def pr_auc(labels, scores) -> float:
    """Achievable (step-wise) interpolation: sum of P_i * (R_i - R_{i-1})."""
    recall, precision, _ = pr_curve(labels, scores)
    return float(np.sum(np.diff(np.r_[0.0, recall]) * precision))


# --- cross-validation ------------------------------------------------------------


@dataclass(frozen=True)
class CvConfig:
    iterations: int = 20
    test_fraction: float = 0.25
    seed: int = 0
    loo_by_well: bool = False

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if not 0.0 < self.test_fraction < 1.0:
            raise ValueError("test_fraction must lie in (0, 1)")


@dataclass
class CvResult:
    labels: np.ndarray
    scores: np.ndarray
    iterations: int
    test_pair_counts: list[int]

    def roc_auc(self) -> float:
        return roc_auc(self.labels, self.scores)

    def pr_auc(self) -> float:
        return pr_auc(self.labels, self.scores)

    @property
    def prevalence(self) -> float:
        return float(np.mean(self.labels))


def _train_model(db: LessonDatabase, indices, train_config: TrainConfig) -> GbdtModel:
    sub = db.subset(indices)
    X, y, _ = build_pair_dataset(sub)
    return gbdt.fit(X, y, train_config, layout_hash=db.window_config.pair_layout_hash())


def cross_validate(
    db: LessonDatabase,
    train_config: TrainConfig = TrainConfig(),
    cv: CvConfig = CvConfig(),
    max_redraws: int = 100,
) -> CvResult:
    """Well-disjoint CV: per iteration a random set of wells is held out, the
    model trains on the remaining wells' lesson pairs, and all pairs among
    held-out lessons are scored. (label, score) pools across iterations.

    With loo_by_well each well is held out once and its lessons are scored
    against every training lesson instead (single-lesson wells admit no
    within-test pairs).
    """
    wells = db.wells
    if len(wells) < 2:
        raise ValueError("cross-validation requires lessons from at least 2 wells")
    rng = np.random.default_rng(cv.seed)
    all_labels: list[np.ndarray] = []
    all_scores: list[np.ndarray] = []
    counts: list[int] = []

    def well_indices(well_set) -> list[int]:
        return [i for w in well_set for i in db.by_well[w]]

    if cv.loo_by_well:
        for k, well in enumerate(wells):
            test_idx = well_indices([well])
            train_idx = [i for i in range(len(db)) if i not in set(test_idx)]
            train_db = db.subset(train_idx)
            _, y_train, _ = build_pair_dataset(train_db)
            if not (np.any(y_train == 0) and np.any(y_train == 1)):
                continue
            cfg = dataclasses.replace(train_config, seed=train_config.seed + k)
            model = _train_model(db, train_idx, cfg)
            X_test, y_test = pair_dataset_between(db.subset(test_idx), train_db)
            all_labels.append(y_test)
            all_scores.append(model.predict_score(X_test))
            counts.append(len(y_test))
        iterations = len(counts)
    else:
        n_test = max(1, int(round(cv.test_fraction * len(wells))))
        n_test = min(n_test, len(wells) - 1)
        for k in range(cv.iterations):
            ok = False
            for _ in range(max_redraws):
                pick = rng.choice(len(wells), size=n_test, replace=False)
                test_wells = {wells[i] for i in pick}
                test_idx = well_indices(sorted(test_wells))
                train_idx = well_indices([w for w in wells if w not in test_wells])
                if len(test_idx) < 2 or len(train_idx) < 2:
                    continue
                _, y_train, _ = build_pair_dataset(db.subset(train_idx))
                if not (np.any(y_train == 0) and np.any(y_train == 1)):
                    continue
                ok = True
                break
            if not ok:
                raise ValueError(
                    "could not draw a valid train/test well split; too few wells or lessons"
                )
            assert not (set(db.lessons[i].well_id for i in train_idx)
                        & set(db.lessons[i].well_id for i in test_idx))
            cfg = dataclasses.replace(train_config, seed=train_config.seed + k)
            model = _train_model(db, train_idx, cfg)
            X_test, y_test, _ = build_pair_dataset(db.subset(test_idx))
            all_labels.append(y_test)
            all_scores.append(model.predict_score(X_test))
            counts.append(len(y_test))
        iterations = cv.iterations

    return CvResult(
        labels=np.concatenate(all_labels).astype(np.int64),
        scores=np.concatenate(all_scores),
        iterations=iterations,
        test_pair_counts=counts,
    )


# --- alarm-level scoring -----------------------------------------------------------


@dataclass
class WellScore:
    well_id: str
    true_types: tuple[AccidentType, ...]
    duration_days: float
    tp: dict[AccidentType, int] = field(default_factory=dict)
    fp: dict[AccidentType, int] = field(default_factory=dict)
    fp_ticks: tuple[int, ...] = ()

    @property
    def total_tp(self) -> int:
        return sum(self.tp.values())

    @property
    def total_fp(self) -> int:
        return sum(self.fp.values())


def score_alarms(
    alarms: Sequence[Alarm],
    events: Sequence[GroundTruthEvent],
    duration_ticks: int,
    well_id: str = "",
) -> WellScore:
    """Apply the TP-window / FP-dedup rules to one well's alarm list."""
    score = WellScore(
        well_id=well_id or (alarms[0].well_id if alarms else ""),
        true_types=tuple(ev.accident_type for ev in events),
        duration_days=duration_ticks / TICKS_PER_DAY,
        tp={t: 0 for t in ACCIDENT_TYPES},
        fp={t: 0 for t in ACCIDENT_TYPES},
    )
    detected = [False] * len(events)
    last_counted_fp: Optional[int] = None
    fp_ticks: list[int] = []
    for alarm in sorted(alarms, key=lambda a: a.tick):
        supports = False
        for i, ev in enumerate(events):
            in_window = (
                ev.anchor_tick - TP_WINDOW_BEFORE <= alarm.tick <= ev.anchor_tick + TP_WINDOW_AFTER
            )
            if in_window and alarm.voted_type == ev.accident_type:
                supports = True
                detected[i] = True
        if supports:
            continue
        if last_counted_fp is None or alarm.tick - last_counted_fp >= FP_DEDUP_TICKS:
            score.fp[alarm.voted_type] = score.fp.get(alarm.voted_type, 0) + 1
            last_counted_fp = alarm.tick
            fp_ticks.append(alarm.tick)
    for i, ev in enumerate(events):
        if detected[i]:
            score.tp[ev.accident_type] += 1
    score.fp_ticks = tuple(fp_ticks)
    return score


@dataclass
class AlarmScoreReport:
    wells: list[WellScore]

    @property
    def total_tp(self) -> int:
        return sum(w.total_tp for w in self.wells)

    @property
    def total_fp(self) -> int:
        return sum(w.total_fp for w in self.wells)

    @property
    def total_days(self) -> float:
        return sum(w.duration_days for w in self.wells)

    def to_csv(self, path: str | Path) -> None:
        header = ["well_id", "true_accident_types", "duration_days"]
        for t in ACCIDENT_TYPES:
            header += [f"tp_{t.value}", f"fp_{t.value}"]
        with Path(path).open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for w in self.wells:
                row = [
                    w.well_id,
                    "|".join(t.value for t in w.true_types) or "normal_mode",
                    f"{w.duration_days:.6g}",
                ]
                for t in ACCIDENT_TYPES:
                    row += [w.tp.get(t, 0), w.fp.get(t, 0)]
                writer.writerow(row)


def false_alarms_per_day(report: AlarmScoreReport) -> float:
    if report.total_days <= 0:
        raise ValueError("total signal duration must be positive")
    return report.total_fp / report.total_days


# --- threshold sweep ---------------------------------------------------------------


@dataclass(frozen=True)
class SweepPoint:
    threshold: float
    total_tp: int
    total_fp: int
    mean_fp_per_well: float


def threshold_sweep(
    traces_by_well: Mapping[str, Sequence[ScorePoint]],
    events_by_well: Mapping[str, Sequence[GroundTruthEvent]],
    durations_by_well: Mapping[str, int],
    thresholds: Sequence[float],
) -> list[SweepPoint]:
    """Re-threshold stored replay traces and re-apply the alarm rules at each
    threshold; the model itself is never re-scored."""
    thresholds = list(thresholds)
    if thresholds != sorted(thresholds):
        raise ValueError("thresholds must be sorted ascending")
    out = []
    for theta in thresholds:
        total_tp = 0
        total_fp = 0
        for well_id, trace in traces_by_well.items():
            alarms = alarms_from_trace(trace, well_id, theta)
            ws = score_alarms(
                alarms, events_by_well.get(well_id, ()), durations_by_well[well_id], well_id
            )
            total_tp += ws.total_tp
            total_fp += ws.total_fp
        out.append(SweepPoint(
            threshold=theta,
            total_tp=total_tp,
            total_fp=total_fp,
            mean_fp_per_well=total_fp / max(1, len(traces_by_well)),
        ))
    return out


# --- report files ---------------------------------------------------------------


def write_roc_csv(labels, scores, path: str | Path) -> None:
    fpr, tpr, thr = roc_curve(labels, scores)
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["threshold", "fpr", "tpr"])
        for t, x, y in zip(thr, fpr, tpr):
            writer.writerow([repr(float(t)), repr(float(x)), repr(float(y))])


def write_pr_csv(labels, scores, path: str | Path) -> None:
    recall, precision, thr = pr_curve(labels, scores)
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["threshold", "recall", "precision"])
        for t, r, p in zip(thr, recall, precision):
            writer.writerow([repr(float(t)), repr(float(r)), repr(float(p))])


def write_sweep_csv(points: Sequence[SweepPoint], path: str | Path) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["threshold", "total_tp", "total_fp", "mean_fp_per_well"])
        for p in points:
            writer.writerow([repr(p.threshold), p.total_tp, p.total_fp, repr(p.mean_fp_per_well)])


def write_summary_json(
    path: str | Path,
    roc: float,
    pr: float,
    confusion: ConfusionMatrix,
    fp_per_day: Optional[float] = None,
    extra: Optional[dict] = None,
) -> None:
    payload = {
        "roc_auc": roc,
        "pr_auc": pr,
        "confusion": confusion.as_dict(),
    }
    if fp_per_day is not None:
        payload["fp_per_day"] = fp_per_day
    if extra:
        payload.update(extra)
    with Path(path).open("w") as fh:
        json.dump(payload, fh, indent=2)
