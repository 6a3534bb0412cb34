"""Aggregated-statistics features for 2-hour telemetry intervals.

Each channel is summarized over a set of trailing sub-windows by five
statistics: mean, population variance, slope angle (arctangent of the
least-squares slope in value units per tick), mean absolute deviation, and
relative coefficient (std/mean, i.e. the coefficient of variation). A pair
of intervals is encoded symmetrically per coordinate as (|a-b|, min, max),
which forces any downstream similarity score to be symmetric.

Missing feature entries are NaN throughout: statistics are computed over
observed samples only, and degenerate windows (fewer than two observed
samples, or a near-zero mean for the relative coefficient) yield NaN rather
than an error.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .telemetry import CANONICAL_CHANNELS, ChannelId, Interval

STATISTICS: tuple[str, ...] = ("mean", "variance", "slope_angle", "mean_abs_dev", "rel_coeff")

DEFAULT_WINDOW_TICKS: tuple[int, ...] = (720, 360, 180, 60)  # 2 h, 1 h, 30 min, 10 min

MEAN_EPS = 1e-9

PAIR_COMBINATORS: tuple[str, ...] = ("abs_diff", "min", "max")


class LayoutMismatchError(ValueError):
    """Feature vectors with different layouts were combined."""


@dataclass(frozen=True)
class WindowConfig:
    """Feature layout: which channels, which trailing window sizes.

    Windows are trailing sub-windows of the 2-hour interval; sizes must be
    strictly decreasing, at most 720 ticks, and include 720 itself.
    """

    window_ticks: tuple[int, ...] = DEFAULT_WINDOW_TICKS
    channels: tuple[ChannelId, ...] = CANONICAL_CHANNELS

    def __post_init__(self):
        ws = tuple(int(w) for w in self.window_ticks)
        object.__setattr__(self, "window_ticks", ws)
        object.__setattr__(self, "channels", tuple(self.channels))
        if not ws or any(w <= 0 or w > 720 for w in ws):
            raise ValueError("window sizes must lie in (0, 720]")
        if list(ws) != sorted(set(ws), reverse=True):
            raise ValueError("window sizes must be strictly decreasing")
        if ws[0] != 720:
            raise ValueError("at least one window must span the full 720-tick interval")
        if not self.channels:
            raise ValueError("at least one channel required")

    @property
    def interval_ticks(self) -> int:
        return self.window_ticks[0]

    @property
    def n_features(self) -> int:
        return len(self.channels) * len(self.window_ticks) * len(STATISTICS)

    @property
    def n_pair_features(self) -> int:
        return len(PAIR_COMBINATORS) * self.n_features

    def layout(self) -> list[tuple[str, int, str]]:
        """Ordered (channel, window, statistic) names, one per feature entry."""
        return [
            (c.value, w, s)
            for c in self.channels
            for w in self.window_ticks
            for s in STATISTICS
        ]

    def pair_layout(self) -> list[tuple[str, str, int, str]]:
        return [
            (comb, c, w, s)
            for comb in PAIR_COMBINATORS
            for (c, w, s) in self.layout()
        ]

    def layout_json(self) -> str:
        return json.dumps({"interval": self.layout()}, separators=(",", ":"))

    def pair_layout_json(self) -> str:
        return json.dumps({"pair": self.pair_layout()}, separators=(",", ":"))

    def layout_hash(self) -> str:
        return hashlib.sha256(self.layout_json().encode()).hexdigest()

    def pair_layout_hash(self) -> str:
        return hashlib.sha256(self.pair_layout_json().encode()).hexdigest()

    def save_layout(self, path) -> None:
        """Export the pair-feature layout descriptor next to a model file."""
        payload = {
            "interval_layout": self.layout(),
            "pair_layout": self.pair_layout(),
            "layout_hash": self.layout_hash(),
            "pair_layout_hash": self.pair_layout_hash(),
        }
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=2)


def window_stats(values: np.ndarray, missing: Optional[np.ndarray] = None) -> np.ndarray:
    """Five statistics of one window, observed samples only.

    Returns [mean, variance, slope_angle, mean_abs_dev, rel_coeff] with NaN
    for entries that cannot be computed (all five when nothing is observed;
    all but the mean when a single sample is observed; rel_coeff when
    |mean| <= 1e-9).
    """
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        raise ValueError("window must be non-empty")
    if missing is None:
        observed = ~np.isnan(values)
    else:
        observed = ~np.asarray(missing, dtype=bool)
    out = np.full(5, np.nan)
    n = int(observed.sum())
    if n == 0:
        return out
    x = values[observed]
    mean = float(x.mean())
    out[0] = mean
    if n < 2:
        return out
    var = float(np.mean((x - mean) ** 2))
    out[1] = var
    t = np.nonzero(observed)[0].astype(np.float64)
    tc = t - t.mean()
    slope = float(np.dot(tc, x) / np.dot(tc, tc))
    out[2] = math.atan(slope)
    out[3] = float(np.mean(np.abs(x - mean)))
    if abs(mean) > MEAN_EPS:
        out[4] = math.sqrt(var) / mean
    return out


def interval_features(interval: Interval, config: WindowConfig = WindowConfig()) -> np.ndarray:
    """Flat feature vector for a 720-tick interval under `config`.

    A channel absent from the series contributes an all-NaN block, matching
    the treatment of a fully-masked channel.
    """
    if interval.length != config.interval_ticks:
        raise ValueError(
            f"interval length {interval.length} != required {config.interval_ticks}"
        )
    n = interval.length
    out = np.empty(config.n_features)
    k = 0
    nstat = len(STATISTICS)
    for channel in config.channels:
        if not interval.has_channel(channel):
            out[k:k + len(config.window_ticks) * nstat] = np.nan
            k += len(config.window_ticks) * nstat
            continue
        vals = interval.values(channel)
        miss = interval.missing(channel)
        for w in config.window_ticks:
            out[k:k + nstat] = window_stats(vals[n - w:], miss[n - w:])
            k += nstat
    return out


def pair_features(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Symmetric pair encoding (|a-b|, min, max), concatenated.

    NaN in either input propagates to all three derived coordinates.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise LayoutMismatchError(f"layout mismatch: {a.shape} vs {b.shape}")
    return np.concatenate([np.abs(a - b), np.minimum(a, b), np.maximum(a, b)])


def pair_features_matrix(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Row-wise pair_features for stacks of interval vectors (n, d) -> (n, 3d)."""
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    if A.shape != B.shape or A.ndim != 2:
        raise LayoutMismatchError(f"layout mismatch: {A.shape} vs {B.shape}")
    return np.hstack([np.abs(A - B), np.minimum(A, B), np.maximum(A, B)])
