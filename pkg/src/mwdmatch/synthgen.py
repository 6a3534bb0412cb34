"""Seeded synthetic MWD corpus generator.

Builds wells with per-operation baseline regimes (smooth correlated noise on
top of plausible channel levels, continuous depth dynamics) and injects one
accident signature per planned event into the 720 ticks preceding its
anchor:

  stuck             alternating drag / slack-off pulses on hook weight with
                    torque spikes and rotation stalls
  washout           sustained pressure decrease at constant flow
  drillstring_break sharp simultaneous drop of pressure and hook weight
  mud_loss          tank volume drains; mild pressure and flow decline
  shale_collar      gradual torque and pressure rise at constant flow
                    (cuttings accumulation; extrapolated pattern)
  fluid_show        tank volume and gas content rise

Signature magnitudes are `snr` multiples of the baseline noise standard
deviation - generator parameters, not field-calibrated claims. Everything
is a pure function of (plan, seed): identical plans give bitwise-identical
series.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Mapping, Optional

import numpy as np

from .telemetry import ChannelData, ChannelId, TelemetrySeries, write_csv

LESSON_TICKS = 720


class OperationType(str, Enum):
    TRIPPING_IN = "tripping_in"
    TRIPPING_OUT = "tripping_out"
    DRILLING = "drilling"
    CLEANING = "cleaning"
    REAMING = "reaming"


class AccidentType(str, Enum):
    STUCK = "stuck"
    WASHOUT = "washout"
    DRILLSTRING_BREAK = "drillstring_break"
    MUD_LOSS = "mud_loss"
    SHALE_COLLAR = "shale_collar"
    FLUID_SHOW = "fluid_show"
    NORMAL_MODE = "normal_mode"  # marker for non-accident wells


ACCIDENT_TYPES: tuple[AccidentType, ...] = tuple(a for a in AccidentType if a != AccidentType.NORMAL_MODE)

# Table-style default corpus composition: (accident, operation) -> lesson count.
TABLE1_COMPOSITION: dict[tuple[AccidentType, OperationType], int] = {
    (AccidentType.STUCK, OperationType.TRIPPING_IN): 18,
    (AccidentType.STUCK, OperationType.TRIPPING_OUT): 11,
    (AccidentType.STUCK, OperationType.DRILLING): 10,
    (AccidentType.STUCK, OperationType.REAMING): 1,
    (AccidentType.WASHOUT, OperationType.TRIPPING_IN): 1,
    (AccidentType.WASHOUT, OperationType.TRIPPING_OUT): 1,
    (AccidentType.WASHOUT, OperationType.DRILLING): 10,
    (AccidentType.WASHOUT, OperationType.CLEANING): 1,
    (AccidentType.DRILLSTRING_BREAK, OperationType.TRIPPING_IN): 1,
    (AccidentType.DRILLSTRING_BREAK, OperationType.TRIPPING_OUT): 2,
    (AccidentType.DRILLSTRING_BREAK, OperationType.DRILLING): 4,
    (AccidentType.DRILLSTRING_BREAK, OperationType.CLEANING): 6,
    (AccidentType.MUD_LOSS, OperationType.TRIPPING_IN): 2,
    (AccidentType.MUD_LOSS, OperationType.TRIPPING_OUT): 2,
    (AccidentType.MUD_LOSS, OperationType.DRILLING): 6,
    (AccidentType.MUD_LOSS, OperationType.REAMING): 1,
    (AccidentType.SHALE_COLLAR, OperationType.DRILLING): 9,
    (AccidentType.FLUID_SHOW, OperationType.TRIPPING_OUT): 3,
    (AccidentType.FLUID_SHOW, OperationType.DRILLING): 5,
}

# Baseline regime levels per operation (value units of each channel).
_LEVELS: dict[OperationType, dict[ChannelId, float]] = {
    OperationType.DRILLING: {
        ChannelId.INPUT_PRESSURE: 12.0, ChannelId.INPUT_FLOW: 30.0,
        ChannelId.ROTOR_TORQUE: 8.0, ChannelId.ROTATION_SPEED: 120.0,
        ChannelId.HOOK_WEIGHT: 80.0, ChannelId.WEIGHT_ON_BIT: 8.0,
        ChannelId.GAS_CONTENT: 1.0, ChannelId.TANK_VOLUME: 40.0,
    },
    OperationType.TRIPPING_IN: {
        ChannelId.INPUT_PRESSURE: 2.0, ChannelId.INPUT_FLOW: 5.0,
        ChannelId.ROTOR_TORQUE: 1.0, ChannelId.ROTATION_SPEED: 10.0,
        ChannelId.HOOK_WEIGHT: 60.0, ChannelId.WEIGHT_ON_BIT: 0.5,
        ChannelId.GAS_CONTENT: 0.5, ChannelId.TANK_VOLUME: 40.0,
    },
    OperationType.TRIPPING_OUT: {
        ChannelId.INPUT_PRESSURE: 2.0, ChannelId.INPUT_FLOW: 5.0,
        ChannelId.ROTOR_TORQUE: 1.0, ChannelId.ROTATION_SPEED: 10.0,
        ChannelId.HOOK_WEIGHT: 65.0, ChannelId.WEIGHT_ON_BIT: 0.5,
        ChannelId.GAS_CONTENT: 0.5, ChannelId.TANK_VOLUME: 40.0,
    },
    OperationType.CLEANING: {
        ChannelId.INPUT_PRESSURE: 10.0, ChannelId.INPUT_FLOW: 28.0,
        ChannelId.ROTOR_TORQUE: 3.0, ChannelId.ROTATION_SPEED: 60.0,
        ChannelId.HOOK_WEIGHT: 70.0, ChannelId.WEIGHT_ON_BIT: 1.0,
        ChannelId.GAS_CONTENT: 1.0, ChannelId.TANK_VOLUME: 40.0,
    },
    OperationType.REAMING: {
        ChannelId.INPUT_PRESSURE: 9.0, ChannelId.INPUT_FLOW: 25.0,
        ChannelId.ROTOR_TORQUE: 6.0, ChannelId.ROTATION_SPEED: 80.0,
        ChannelId.HOOK_WEIGHT: 65.0, ChannelId.WEIGHT_ON_BIT: 4.0,
        ChannelId.GAS_CONTENT: 1.0, ChannelId.TANK_VOLUME: 40.0,
    },
}

# Baseline noise standard deviation, nominal per channel. Each well draws a
# noise-scale jitter around these so the corpus is not unrealistically uniform.
NOISE_STD: dict[ChannelId, float] = {
    ChannelId.BIT_DEPTH: 0.05,
    ChannelId.ROTOR_TORQUE: 0.25,
    ChannelId.HOOK_WEIGHT: 1.0,
    ChannelId.INPUT_PRESSURE: 0.2,
    ChannelId.ROTATION_SPEED: 2.0,
    ChannelId.INPUT_FLOW: 0.6,
    ChannelId.BOTTOMHOLE_DEPTH: 0.05,
    ChannelId.GAS_CONTENT: 0.05,
    ChannelId.WEIGHT_ON_BIT: 0.3,
    ChannelId.TANK_VOLUME: 0.5,
}

NOISE_MA_WIDTH = 10  # ticks; smooth correlated noise with short memory

DEFAULT_SNR = 3.0
DEFAULT_GAP_RATE = 0.01
DEFAULT_DURATION = 4320  # 12 hours

_EPOCH = datetime(2020, 1, 1, tzinfo=timezone.utc)


@dataclass(frozen=True)
class GroundTruthEvent:
    accident_type: AccidentType
    operation: OperationType
    anchor_tick: int


@dataclass(frozen=True)
class WellPlan:
    """Deterministic recipe for one synthetic well."""

    well_id: str
    seed: int
    duration_ticks: int
    schedule: tuple[tuple[OperationType, int, int], ...]
    accidents: tuple[tuple[AccidentType, int], ...] = ()

    def __post_init__(self):
        segs = sorted(self.schedule, key=lambda s: s[1])
        if not segs:
            raise ValueError("schedule must not be empty")
        if segs[0][1] != 0 or segs[-1][2] != self.duration_ticks:
            raise ValueError("schedule must cover [0, duration) exactly")
        for (op_a, s_a, e_a), (op_b, s_b, e_b) in zip(segs, segs[1:]):
            if e_a != s_b:
                raise ValueError("schedule segments must be contiguous and disjoint")
        for op, s, e in segs:
            if s >= e:
                raise ValueError("empty schedule segment")
        object.__setattr__(self, "schedule", tuple(segs))
        for acc, anchor in self.accidents:
            if acc == AccidentType.NORMAL_MODE:
                raise ValueError("normal_mode cannot anchor an accident")
            if anchor < LESSON_TICKS:
                raise ValueError(
                    f"accident anchor {anchor} leaves no room for a full "
                    f"{LESSON_TICKS}-tick lesson window"
                )
            if anchor > self.duration_ticks:
                raise ValueError(f"accident anchor {anchor} beyond well duration")

    def operation_at(self, tick: int) -> OperationType:
        tick = min(max(tick, 0), self.duration_ticks - 1)
        for op, s, e in self.schedule:
            if s <= tick < e:
                return op
        raise ValueError(f"tick {tick} not covered by schedule")


def _smooth_noise(rng: np.random.Generator, n: int, std: float) -> np.ndarray:
    """Moving-average-filtered white noise, rescaled to exact (0, std)."""
    white = rng.standard_normal(n)
    w = min(NOISE_MA_WIDTH, n)
    kernel = np.ones(w) / w
    smoothed = np.convolve(white, kernel, mode="same")
    smoothed -= smoothed.mean()
    s = smoothed.std()
    if s > 0:
        smoothed *= std / s
    return smoothed


def _depth_profile(plan: WellPlan, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Continuous bit depth / bottomhole depth across the schedule."""
    n = plan.duration_ticks
    bit = np.empty(n)
    bottom = np.empty(n)
    bh = 1500.0 + rng.uniform(-300.0, 800.0)
    trip_span = rng.uniform(600.0, 1200.0)
    rop = rng.uniform(0.02, 0.045)       # m/tick while on bottom
    trip_rate = rng.uniform(0.7, 1.3)    # m/tick while tripping
    b = bh if plan.schedule[0][0] != OperationType.TRIPPING_IN else max(0.0, bh - trip_span)
    for op, s, e in plan.schedule:
        for t in range(s, e):
            if op == OperationType.DRILLING:
                if b < bh - 0.1:
                    b = min(bh, b + trip_rate)
                else:
                    bh += rop
                    b = bh
            elif op == OperationType.TRIPPING_OUT:
                b = max(max(0.0, bh - trip_span), b - trip_rate)
            elif op == OperationType.TRIPPING_IN:
                b = min(bh, b + trip_rate)
            elif op == OperationType.REAMING:
                b = max(0.0, bh - 30.0 + 25.0 * np.sin(2.0 * np.pi * (t - s) / 240.0))
            # cleaning: hold position
            bit[t] = b
            bottom[t] = bh
    return bit, bottom


def _pulse_train(rng: np.random.Generator, n: int) -> np.ndarray:
    """Alternating +1/-1 square pulses (drags and slack-offs)."""
    out = np.zeros(n)
    t = 0
    sign = 1.0
    while True:
        t += int(rng.integers(12, 30))
        width = int(rng.integers(8, 16))
        if t + width >= n:
            break
        out[t:t + width] = sign
        sign = -sign
        t += width
    return out


def _signature_profiles(rng: np.random.Generator, n: int, anchor: int) -> dict[str, np.ndarray]:
    """Window-local profiles over the whole series, 0 outside the lesson
    window except for a linear 180-tick decay tail after the anchor."""
    start = anchor - LESSON_TICKS
    ramp = np.zeros(n)
    ramp[start:anchor] = np.linspace(0.0, 1.0, LESSON_TICKS, endpoint=False)
    step = np.zeros(n)
    step_at = start + int(rng.integers(240, 480))
    step[step_at:anchor] = 1.0
    pulses = np.zeros(n)
    pulses[start:anchor] = _pulse_train(rng, LESSON_TICKS)
    tail_len = min(180, n - anchor)
    if tail_len > 0:
        decay = np.linspace(1.0, 0.0, tail_len, endpoint=False)
        ramp[anchor:anchor + tail_len] = decay
        step[anchor:anchor + tail_len] = decay
    return {"ramp": ramp, "step": step, "pulses": pulses}


def _inject_signature(
    data: dict[ChannelId, np.ndarray],
    accident: AccidentType,
    profiles: Mapping[str, np.ndarray],
    snr: float,
    noise_scale: Mapping[ChannelId, float],
) -> None:
    amp = {c: snr * noise_scale[c] for c in noise_scale}
    ramp, step, pulses = profiles["ramp"], profiles["step"], profiles["pulses"]
    if accident == AccidentType.WASHOUT:
        data[ChannelId.INPUT_PRESSURE] -= amp[ChannelId.INPUT_PRESSURE] * ramp
    elif accident == AccidentType.MUD_LOSS:
        data[ChannelId.TANK_VOLUME] -= amp[ChannelId.TANK_VOLUME] * ramp
        data[ChannelId.INPUT_PRESSURE] -= 0.7 * amp[ChannelId.INPUT_PRESSURE] * ramp
        data[ChannelId.INPUT_FLOW] -= 0.7 * amp[ChannelId.INPUT_FLOW] * ramp
    elif accident == AccidentType.DRILLSTRING_BREAK:
        data[ChannelId.INPUT_PRESSURE] -= 1.5 * amp[ChannelId.INPUT_PRESSURE] * step
        data[ChannelId.HOOK_WEIGHT] -= 1.5 * amp[ChannelId.HOOK_WEIGHT] * step
    elif accident == AccidentType.STUCK:
        data[ChannelId.HOOK_WEIGHT] += amp[ChannelId.HOOK_WEIGHT] * pulses
        data[ChannelId.ROTOR_TORQUE] += 0.8 * amp[ChannelId.ROTOR_TORQUE] * np.abs(pulses)
        # column movement stalls during drags: rotation collapses inside pulses
        data[ChannelId.ROTATION_SPEED] *= 1.0 - 0.6 * np.abs(pulses)
    elif accident == AccidentType.SHALE_COLLAR:
        data[ChannelId.ROTOR_TORQUE] += amp[ChannelId.ROTOR_TORQUE] * ramp
        data[ChannelId.INPUT_PRESSURE] += amp[ChannelId.INPUT_PRESSURE] * ramp
    elif accident == AccidentType.FLUID_SHOW:
        data[ChannelId.TANK_VOLUME] += amp[ChannelId.TANK_VOLUME] * ramp
        data[ChannelId.GAS_CONTENT] += amp[ChannelId.GAS_CONTENT] * ramp
    else:
        raise ValueError(f"no signature defined for {accident}")


def generate_well(
    plan: WellPlan,
    snr: float = DEFAULT_SNR,
    gap_rate: float = DEFAULT_GAP_RATE,
) -> tuple[TelemetrySeries, list[GroundTruthEvent]]:
    """Synthesize one well. Deterministic for a fixed plan."""
    rng = np.random.default_rng(plan.seed)
    n = plan.duration_ticks

    bit, bottom = _depth_profile(plan, rng)
    data: dict[ChannelId, np.ndarray] = {
        ChannelId.BIT_DEPTH: bit,
        ChannelId.BOTTOMHOLE_DEPTH: bottom,
    }
    level_jitter = {c: rng.uniform(0.9, 1.1) for c in _LEVELS[OperationType.DRILLING]}
    for channel in _LEVELS[OperationType.DRILLING]:
        arr = np.empty(n)
        for op, s, e in plan.schedule:
            arr[s:e] = _LEVELS[op][channel] * level_jitter[channel]
        data[channel] = arr

    # connection cycles: slow hook-weight oscillation while tripping
    period = float(rng.uniform(280.0, 420.0))
    phase = float(rng.uniform(0.0, 2.0 * np.pi))
    t_axis = np.arange(n, dtype=np.float64)
    swing = 10.0 * np.sin(2.0 * np.pi * t_axis / period + phase)
    for op, s, e in plan.schedule:
        if op in (OperationType.TRIPPING_IN, OperationType.TRIPPING_OUT):
            data[ChannelId.HOOK_WEIGHT][s:e] += swing[s:e]

    noise_scale = {c: NOISE_STD[c] * rng.uniform(0.8, 1.25) for c in ChannelId}
    for channel in ChannelId:
        data[channel] = data[channel] + _smooth_noise(rng, n, noise_scale[channel])

    events: list[GroundTruthEvent] = []
    for accident, anchor in plan.accidents:
        profiles = _signature_profiles(rng, n, anchor)
        _inject_signature(data, accident, profiles, snr, noise_scale)
        events.append(GroundTruthEvent(accident, plan.operation_at(anchor - 1), anchor))

    missing = np.zeros(n, dtype=bool)
    if gap_rate > 0:
        target = int(round(gap_rate * n))
        placed = 0
        while placed < target:
            start = int(rng.integers(0, n))
            width = int(rng.integers(3, 11))
            seg = missing[start:start + width]
            placed += int((~seg).sum())
            seg[:] = True

    channels = {
        c: ChannelData(values=data[c], missing=missing.copy()) for c in ChannelId
    }
    series = TelemetrySeries(well_id=plan.well_id, start_time=_EPOCH, channels=channels)
    return series, events


# --- scripted signature detectors ---------------------------------------------
#
# Used to verify that each accident's injected pattern is separable from the
# same well's baseline by a check that looks only at that pattern. Thresholds
# are in units of the window's own noise scale, estimated robustly from
# one-tick differences (median absolute deviation), with a floor at a
# fraction of the nominal scale so a degenerate window cannot zero it out.


def _estimate_sigma(values: np.ndarray, missing: np.ndarray, channel: ChannelId) -> float:
    v = np.where(missing, np.nan, values)
    d = np.diff(v)
    d = d[~np.isnan(d)]
    floor = 0.3 * NOISE_STD[channel]
    if d.size < 10:
        return NOISE_STD[channel]
    mad = np.median(np.abs(d - np.median(d)))
    # diff of MA(15)-smoothed unit noise has std sqrt(2/15); 1.4826 MAD -> std
    sigma = mad * 1.4826 / np.sqrt(2.0 / NOISE_MA_WIDTH)
    return max(float(sigma), floor)


def _fitted_change(values: np.ndarray, missing: np.ndarray) -> float:
    """Least-squares total change (slope x span) over observed samples."""
    obs = ~missing & ~np.isnan(values)
    if obs.sum() < 2:
        return 0.0
    t = np.nonzero(obs)[0].astype(np.float64)
    x = values[obs]
    tc = t - t.mean()
    denom = float(np.dot(tc, tc))
    if denom == 0.0:
        return 0.0
    slope = float(np.dot(tc, x - x.mean())) / denom
    return slope * (len(values) - 1)


def _sharp_drops(values: np.ndarray, missing: np.ndarray, threshold: float) -> np.ndarray:
    """Ticks where the one-tick difference falls below -threshold."""
    v = np.where(missing, np.nan, values)
    d = np.diff(v)
    return np.nonzero(~np.isnan(d) & (d <= -threshold))[0]


def signature_fires(accident: AccidentType, series: TelemetrySeries, window_start: int) -> bool:
    """Does the type's mud-log pattern show in [window_start, +720)?

    Baseline comparisons should use windows lying within a single operation
    segment: an operation change is a legitimate regime shift, not baseline.
    """
    end = window_start + LESSON_TICKS
    if not (0 <= window_start and end <= series.length):
        raise ValueError("detector window out of range")

    def win(c: ChannelId) -> tuple[np.ndarray, np.ndarray]:
        return series.values(c)[window_start:end], series.missing(c)[window_start:end]

    def sigma(c: ChannelId) -> float:
        return _estimate_sigma(*win(c), c)

    if accident == AccidentType.WASHOUT:
        dp = _fitted_change(*win(ChannelId.INPUT_PRESSURE))
        df = _fitted_change(*win(ChannelId.INPUT_FLOW))
        return dp <= -1.5 * sigma(ChannelId.INPUT_PRESSURE) and abs(df) <= 1.5 * sigma(ChannelId.INPUT_FLOW)
    if accident == AccidentType.MUD_LOSS:
        dt = _fitted_change(*win(ChannelId.TANK_VOLUME))
        return dt <= -1.5 * sigma(ChannelId.TANK_VOLUME)
    if accident == AccidentType.DRILLSTRING_BREAK:
        drops_p = _sharp_drops(*win(ChannelId.INPUT_PRESSURE), 2.0 * sigma(ChannelId.INPUT_PRESSURE))
        drops_h = _sharp_drops(*win(ChannelId.HOOK_WEIGHT), 2.0 * sigma(ChannelId.HOOK_WEIGHT))
        return any(
            np.any(np.abs(drops_h - t) <= 3) for t in drops_p
        )
    if accident == AccidentType.STUCK:
        vals, miss = win(ChannelId.HOOK_WEIGHT)
        v = np.where(miss, np.nan, vals)
        d = np.diff(v)
        jumps = np.abs(d[~np.isnan(d)]) > 1.5 * sigma(ChannelId.HOOK_WEIGHT)
        return int(jumps.sum()) >= 8
    if accident == AccidentType.SHALE_COLLAR:
        dtq = _fitted_change(*win(ChannelId.ROTOR_TORQUE))
        dp = _fitted_change(*win(ChannelId.INPUT_PRESSURE))
        return (
            dtq >= 1.3 * sigma(ChannelId.ROTOR_TORQUE)
            and dp >= 1.3 * sigma(ChannelId.INPUT_PRESSURE)
        )
    if accident == AccidentType.FLUID_SHOW:
        dt = _fitted_change(*win(ChannelId.TANK_VOLUME))
        dg = _fitted_change(*win(ChannelId.GAS_CONTENT))
        return (
            dt >= 1.3 * sigma(ChannelId.TANK_VOLUME)
            and dg >= 1.3 * sigma(ChannelId.GAS_CONTENT)
        )
    raise ValueError(f"no detector for {accident}")


# --- corpus assembly -----------------------------------------------------------


@dataclass(frozen=True)
class LessonRecord:
    """One manifest row; telemetry_file is relative to the manifest."""

    lesson_id: str
    well_id: str
    accident_type: AccidentType
    operation: OperationType
    anchor_tick: int
    telemetry_file: str

    def to_json(self) -> dict:
        return {
            "lesson_id": self.lesson_id,
            "well_id": self.well_id,
            "accident_type": self.accident_type.value,
            "operation": self.operation.value,
            "anchor_tick": self.anchor_tick,
            "telemetry_file": self.telemetry_file,
        }


@dataclass
class SyntheticCorpus:
    wells: list[TelemetrySeries]
    lessons: list[LessonRecord]
    events_by_well: dict[str, list[GroundTruthEvent]]
    plans: list[WellPlan] = dataclasses.field(default_factory=list)

    def well(self, well_id: str) -> TelemetrySeries:
        for w in self.wells:
            if w.well_id == well_id:
                return w
        raise KeyError(well_id)

    def plan(self, well_id: str) -> WellPlan:
        for p in self.plans:
            if p.well_id == well_id:
                return p
        raise KeyError(well_id)


def baseline_window_starts(plan: WellPlan, step: int = 120) -> list[int]:
    """Start ticks of 720-tick windows lying inside a single operation
    segment and clear of every accident signature (including its decay
    tail). These are the windows a signature detector must stay silent on."""
    starts = []
    for _, seg_start, seg_end in plan.schedule:
        for s in range(seg_start, seg_end - LESSON_TICKS + 1, step):
            e = s + LESSON_TICKS
            clear = all(
                e <= anchor - LESSON_TICKS - 60 or s >= anchor + 240
                for _, anchor in plan.accidents
            )
            if clear:
                starts.append(s)
    return starts


def _lesson_plan(
    well_id: str,
    accident: AccidentType,
    operation: OperationType,
    rng: np.random.Generator,
    duration: int,
) -> WellPlan:
    anchor = int(rng.integers(2760, 3121))
    others = [op for op in OperationType if op != operation]
    pre = others[int(rng.integers(0, len(others)))]
    post = others[int(rng.integers(0, len(others)))]
    s1 = anchor - 1560
    s2 = min(duration, anchor + 840)
    schedule = [(pre, 0, s1), (operation, s1, s2)]
    if s2 < duration:
        schedule.append((post, s2, duration))
    return WellPlan(
        well_id=well_id,
        seed=int(rng.integers(0, 2**63)),
        duration_ticks=duration,
        schedule=tuple(schedule),
        accidents=((accident, anchor),),
    )


def _normal_plan(
    well_id: str,
    operation: Optional[OperationType],
    rng: np.random.Generator,
    duration: int,
) -> WellPlan:
    ops = list(OperationType)
    mid = operation if operation is not None else ops[int(rng.integers(0, len(ops)))]
    pre = ops[int(rng.integers(0, len(ops)))]
    post = ops[int(rng.integers(0, len(ops)))]
    s1 = int(rng.integers(duration // 4, duration // 2))
    s2 = int(rng.integers(s1 + duration // 4, duration))
    schedule = [(pre, 0, s1), (mid, s1, s2)]
    if s2 < duration:
        schedule.append((post, s2, duration))
    return WellPlan(
        well_id=well_id,
        seed=int(rng.integers(0, 2**63)),
        duration_ticks=duration,
        schedule=tuple(schedule),
        accidents=(),
    )


def generate_corpus(
    seed: int,
    composition: Optional[Mapping[tuple[AccidentType, OperationType], int]] = None,
    normal_wells: int = 0,
    snr: float = DEFAULT_SNR,
    duration_ticks: int = DEFAULT_DURATION,
    gap_rate: float = DEFAULT_GAP_RATE,
) -> SyntheticCorpus:
    """Build a corpus covering `composition` (default: the 94-lesson table),
    one lesson per well, plus optional accident-free wells."""
    if composition is None:
        composition = TABLE1_COMPOSITION
    for (acc, op), count in composition.items():
        if count < 0:
            raise ValueError(f"negative count for ({acc.value}, {op.value})")
    rng = np.random.default_rng(seed)
    wells: list[TelemetrySeries] = []
    lessons: list[LessonRecord] = []
    events_by_well: dict[str, list[GroundTruthEvent]] = {}
    plans: list[WellPlan] = []
    idx = 0

    def ordered_cells():
        for acc in AccidentType:
            for op in OperationType:
                if (acc, op) in composition:
                    yield acc, op, composition[(acc, op)]

    for acc, op, count in ordered_cells():
        for _ in range(count):
            idx += 1
            well_id = f"SYN-{idx:03d}"
            if acc == AccidentType.NORMAL_MODE:
                plan = _normal_plan(well_id, op, rng, duration_ticks)
            else:
                plan = _lesson_plan(well_id, acc, op, rng, duration_ticks)
            series, events = generate_well(plan, snr=snr, gap_rate=gap_rate)
            wells.append(series)
            plans.append(plan)
            events_by_well[well_id] = events
            if acc != AccidentType.NORMAL_MODE:
                lessons.append(LessonRecord(
                    lesson_id=f"L{idx:03d}",
                    well_id=well_id,
                    accident_type=acc,
                    operation=op,
                    anchor_tick=plan.accidents[0][1],
                    telemetry_file=f"telemetry/{well_id}.csv",
                ))

    for _ in range(normal_wells):
        idx += 1
        well_id = f"SYN-{idx:03d}"
        plan = _normal_plan(well_id, None, rng, duration_ticks)
        series, events = generate_well(plan, snr=snr, gap_rate=gap_rate)
        wells.append(series)
        plans.append(plan)
        events_by_well[well_id] = events

    return SyntheticCorpus(wells=wells, lessons=lessons, events_by_well=events_by_well, plans=plans)


def save_corpus(corpus: SyntheticCorpus, out_dir: str | Path) -> Path:
    """Write telemetry/*.csv, manifest.json (lesson array) and events.json.
    Returns the manifest path."""
    out = Path(out_dir)
    (out / "telemetry").mkdir(parents=True, exist_ok=True)
    for series in corpus.wells:
        write_csv(series, out / "telemetry" / f"{series.well_id}.csv")
    manifest_path = out / "manifest.json"
    with manifest_path.open("w") as fh:
        json.dump([rec.to_json() for rec in corpus.lessons], fh, indent=2)
    events_payload = {
        "wells": [
            {
                "well_id": series.well_id,
                "duration_ticks": series.length,
                "telemetry_file": f"telemetry/{series.well_id}.csv",
                "events": [
                    {
                        "accident_type": ev.accident_type.value,
                        "operation": ev.operation.value,
                        "anchor_tick": ev.anchor_tick,
                    }
                    for ev in corpus.events_by_well[series.well_id]
                ],
            }
            for series in corpus.wells
        ]
    }
    with (out / "events.json").open("w") as fh:
        json.dump(events_payload, fh, indent=2)
    return manifest_path


def load_events(path: str | Path) -> dict[str, dict]:
    """Read events.json -> {well_id: {duration_ticks, telemetry_file, events}}."""
    with Path(path).open() as fh:
        payload = json.load(fh)
    out = {}
    for entry in payload["wells"]:
        out[entry["well_id"]] = {
            "duration_ticks": int(entry["duration_ticks"]),
            "telemetry_file": entry.get("telemetry_file"),
            "events": [
                GroundTruthEvent(
                    AccidentType(ev["accident_type"]),
                    OperationType(ev["operation"]),
                    int(ev["anchor_tick"]),
                )
                for ev in entry["events"]
            ],
        }
    return out
