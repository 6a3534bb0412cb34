"""Distortion protocol: how much can a known interval be perturbed before
the model stops recognizing it?

Lessons are re-queried against the database after multiplicative smooth
noise, tick shifts, or smoothing; their max-similarity distributions are
compared with those of accident-free windows. Separation is summarized by
the quantile gap R = q10(target) - q90(random): values above 0 are valid,
above 0.2 good. R's spread is estimated by paired bootstrap resampling.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .detector import SimilarityModel, max_similarity
from .lessons import LessonDatabase
from .synthgen import GroundTruthEvent
from .telemetry import ChannelData, ChannelId, Interval, TelemetrySeries, slice_interval

WINDOW_TICKS = 720
NOISE_CURVE_MA_WIDTH = 60
NORMAL_WINDOW_CLEARANCE = 1440  # ticks between a "normal" window and any anchor

DISTORTION_KINDS = ("noise", "shift", "smooth")


@dataclass(frozen=True)
class DistortionSpec:
    """kind "noise": multiply each channel by an independent smooth curve with
    mean 1 and std `magnitude`. kind "shift": translate the window start by
    `magnitude` ticks within the parent series. kind "smooth": replace values
    by a centered moving average of half-width `magnitude` ticks."""

    kind: str
    magnitude: float
    seed: int = 0

    def __post_init__(self):
        if self.kind not in DISTORTION_KINDS:
            raise ValueError(f"unknown distortion kind {self.kind!r}")
        if self.kind == "noise" and self.magnitude < 0:
            raise ValueError("noise std must be >= 0")
        if self.kind == "shift" and abs(int(self.magnitude)) >= WINDOW_TICKS:
            raise ValueError(f"|shift| must be < {WINDOW_TICKS} ticks")
        if self.kind == "smooth" and self.magnitude < 0:
            raise ValueError("smoothing half-width must be >= 0")


@dataclass(frozen=True)
class SimilarityDistribution:
    label: str
    samples: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=np.float64)
        if s.size and (s.min() < 0.0 or s.max() > 1.0):
            raise ValueError("similarity samples must lie in [0, 1]")
        object.__setattr__(self, "samples", s)


def smooth_noise_curve(length: int, sigma: float, seed: int) -> np.ndarray:
    """Smooth multiplicative curve: moving-average-filtered white noise,
    affinely rescaled so the sample mean is exactly 1 and the (population)
    standard deviation exactly sigma."""
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    rng = np.random.default_rng(seed)
    white = rng.standard_normal(length)
    w = min(NOISE_CURVE_MA_WIDTH, length)
    smoothed = np.convolve(white, np.ones(w) / w, mode="same")
    centered = smoothed - smoothed.mean()
    s = centered.std()
    if sigma == 0.0 or s == 0.0:
        return np.ones(length)
    return 1.0 + centered * (sigma / s)


def _materialize(interval: Interval, data: dict[ChannelId, np.ndarray], tag: str) -> Interval:
    channels = {
        c: ChannelData(values=data[c], missing=interval.missing(c).copy())
        for c in data
    }
    series = TelemetrySeries(
        well_id=f"{interval.series.well_id}#{tag}",
        start_time=interval.series.tick_time(interval.start_tick),
        channels=channels,
    )
    return slice_interval(series, 0, interval.length)


def distort(interval: Interval, spec: DistortionSpec) -> Interval:
    """Apply one distortion; returns a materialized copy (masks preserved)."""
    present = [c for c in ChannelId if interval.has_channel(c)]
    if spec.kind == "shift":
        m = int(spec.magnitude)
        shifted = slice_interval(
            interval.series, interval.start_tick + m, interval.end_tick + m
        )
        data = {c: shifted.values(c).copy() for c in present}
        out = _materialize(shifted, data, f"shift{m:+d}")
        return out
    if spec.kind == "noise":
        data = {}
        for k, c in enumerate(present):
            curve = smooth_noise_curve(interval.length, spec.magnitude, spec.seed + k)
            data[c] = interval.values(c) * curve
        return _materialize(interval, data, f"noise{spec.magnitude:g}")
    # smooth
    h = int(spec.magnitude)
    kernel = np.ones(2 * h + 1)
    data = {}
    for c in present:
        vals = interval.values(c)
        miss = interval.missing(c)
        filled = np.where(miss, 0.0, np.where(np.isnan(vals), 0.0, vals))
        counts = np.convolve((~miss).astype(np.float64), kernel, mode="same")
        sums = np.convolve(filled, kernel, mode="same")
        with np.errstate(invalid="ignore"):
            avg = sums / counts
        data[c] = np.where(miss, np.nan, avg)
    return _materialize(interval, data, f"smooth{h}")


def sample_normal_windows(
    wells: Sequence[TelemetrySeries],
    events_by_well: Mapping[str, Sequence[GroundTruthEvent]],
    n: int,
    seed: int,
) -> list[Interval]:
    """Uniform accident-free 720-tick windows, at least 1440 ticks away from
    every event anchor."""
    candidates: list[tuple[int, int]] = []
    for w_idx, series in enumerate(wells):
        if series.length < WINDOW_TICKS:
            continue
        ok = np.ones(series.length - WINDOW_TICKS + 1, dtype=bool)
        for ev in events_by_well.get(series.well_id, ()):
            a = ev.anchor_tick
            lo = max(0, a - NORMAL_WINDOW_CLEARANCE - WINDOW_TICKS + 1)
            hi = min(len(ok), a + NORMAL_WINDOW_CLEARANCE)
            ok[lo:hi] = False
        for s in np.nonzero(ok)[0]:
            candidates.append((w_idx, int(s)))
    if not candidates:
        raise ValueError("no accident-free windows available")
    rng = np.random.default_rng(seed)
    replace = len(candidates) < n
    picks = rng.choice(len(candidates), size=n, replace=replace)
    return [
        slice_interval(wells[candidates[p][0]], candidates[p][1], candidates[p][1] + WINDOW_TICKS)
        for p in picks
    ]


def similarity_distributions(
    model: SimilarityModel,
    db: LessonDatabase,
    wells: Sequence[TelemetrySeries],
    events_by_well: Mapping[str, Sequence[GroundTruthEvent]],
    shift_ticks: Sequence[int] = (20, 40),
    noise_stds: Sequence[float] = (0.01, 0.03, 0.10),
    n_random: int = 100,
    seed: int = 0,
) -> list[SimilarityDistribution]:
    """Max-similarity samples for the four test-set families: accident-free
    windows, the lesson intervals themselves, and their shifted and noised
    copies."""
    if len(db) == 0:
        raise ValueError("lesson database is empty")
    out = []
    normal = sample_normal_windows(wells, events_by_well, n_random, seed)
    out.append(SimilarityDistribution(
        "random_normal",
        np.array([max_similarity(model, itv, db) for itv in normal]),
    ))
    out.append(SimilarityDistribution(
        "lessons",
        np.array([max_similarity(model, l.interval, db) for l in db.lessons]),
    ))
    for m in shift_ticks:
        spec = DistortionSpec("shift", m)
        samples = [
            max_similarity(model, distort(l.interval, spec), db) for l in db.lessons
        ]
        out.append(SimilarityDistribution(f"shifted({m})", np.array(samples)))
    for sigma in noise_stds:
        samples = [
            max_similarity(
                model,
                distort(l.interval, DistortionSpec("noise", sigma, seed=seed + 7919 * i)),
                db,
            )
            for i, l in enumerate(db.lessons)
        ]
        out.append(SimilarityDistribution(f"noised({sigma:g})", np.array(samples)))
    return out


def r_metric(target: np.ndarray, random: np.ndarray) -> float:
    """Quantile gap R = q10(target) - q90(random), linear interpolation.
    Positive values mean the target set separates from random windows;
    above 0.2 is comfortable."""
    target = np.asarray(target, dtype=np.float64)
    random = np.asarray(random, dtype=np.float64)
    if target.size == 0 or random.size == 0:
        raise ValueError("both samples must be non-empty")
    return float(np.quantile(target, 0.10) - np.quantile(random, 0.90))


def bootstrap_r_samples(
    target: np.ndarray,
    random: np.ndarray,
    n_resamples: int = 100,
    seed: int = 0,
) -> np.ndarray:
    """R over paired resamples-with-replacement of both sets."""
    target = np.asarray(target, dtype=np.float64)
    random = np.asarray(random, dtype=np.float64)
    if target.size == 0 or random.size == 0:
        raise ValueError("both samples must be non-empty")
    rng = np.random.default_rng(seed)
    out = np.empty(n_resamples)
    for k in range(n_resamples):
        t = target[rng.integers(0, target.size, size=target.size)]
        r = random[rng.integers(0, random.size, size=random.size)]
        out[k] = r_metric(t, r)
    return out


def bootstrap_std(
    target: np.ndarray,
    random: np.ndarray,
    n_resamples: int = 100,
    seed: int = 0,
) -> float:
    """Standard deviation (population) of R over the bootstrap replicates."""
    return float(bootstrap_r_samples(target, random, n_resamples, seed).std())


def write_boxplot_csv(distributions: Sequence[SimilarityDistribution], path: str | Path) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["set_label", "sample_value"])
        for dist in distributions:
            for v in dist.samples:
                writer.writerow([dist.label, repr(float(v))])


def write_r_table_csv(
    rows: Sequence[tuple[str, float, float]], path: str | Path
) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["set_label", "R", "R_std"])
        for label, r, r_std in rows:
            writer.writerow([label, repr(float(r)), repr(float(r_std))])
