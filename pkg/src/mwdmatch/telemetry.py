"""Canonical data model for MWD telemetry.

A series lives on a uniform 10-second tick grid. Each channel carries a
value array plus an explicit missing mask; a masked sample must never be
read. Ingestion snaps raw timestamps to the nearest tick (last write wins)
and marks unsampled ticks missing.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Mapping, Optional

import numpy as np

TICK_SECONDS = 10


class TelemetryError(ValueError):
    """Malformed telemetry input or an invalid series operation."""


class ChannelId(str, Enum):
    """Telemetry channels. The first nine are the canonical MWD set;
    TANK_VOLUME is an extension used by the synthetic generator."""

    BIT_DEPTH = "bit_depth"              # m
    ROTOR_TORQUE = "rotor_torque"        # kN·m
    HOOK_WEIGHT = "hook_weight"          # t
    INPUT_PRESSURE = "input_pressure"    # MPa
    ROTATION_SPEED = "rotation_speed"    # rpm
    INPUT_FLOW = "input_flow"            # L/s
    BOTTOMHOLE_DEPTH = "bottomhole_depth"  # m
    GAS_CONTENT = "gas_content"          # %
    WEIGHT_ON_BIT = "weight_on_bit"      # t
    TANK_VOLUME = "tank_volume"          # m³ (extension channel)


CANONICAL_CHANNELS: tuple[ChannelId, ...] = tuple(ChannelId)[:9]

CHANNEL_UNITS: dict[ChannelId, str] = {
    ChannelId.BIT_DEPTH: "m",
    ChannelId.ROTOR_TORQUE: "kN·m",
    ChannelId.HOOK_WEIGHT: "t",
    ChannelId.INPUT_PRESSURE: "MPa",
    ChannelId.ROTATION_SPEED: "rpm",
    ChannelId.INPUT_FLOW: "L/s",
    ChannelId.BOTTOMHOLE_DEPTH: "m",
    ChannelId.GAS_CONTENT: "%",
    ChannelId.WEIGHT_ON_BIT: "t",
    ChannelId.TANK_VOLUME: "m³",
}


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class ChannelData:
    """One channel: values plus missing mask. Values at masked positions are
    NaN so an accidental read is loud rather than silently wrong."""

    values: np.ndarray
    missing: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        missing = np.asarray(self.missing, dtype=bool)
        if values.shape != missing.shape or values.ndim != 1:
            raise TelemetryError("channel values and mask must be equal-length 1-D arrays")
        values = values.copy()
        values[missing] = np.nan
        object.__setattr__(self, "values", _freeze(values))
        object.__setattr__(self, "missing", _freeze(missing.copy()))


@dataclass(frozen=True)
class TelemetrySeries:
    """Multichannel MWD signal on the uniform tick grid.

    Immutable after construction; safe for concurrent reads.
    """

    well_id: str
    start_time: datetime
    channels: Mapping[ChannelId, ChannelData]
    tick_seconds: int = TICK_SECONDS
    length: int = field(default=0)

    def __post_init__(self):
        if self.tick_seconds != TICK_SECONDS:
            raise TelemetryError(f"tick_seconds is fixed at {TICK_SECONDS}")
        if not self.channels:
            raise TelemetryError("series must carry at least one channel")
        lengths = {len(ch.values) for ch in self.channels.values()}
        if len(lengths) != 1:
            raise TelemetryError("all channel arrays must have identical length")
        n = lengths.pop()
        if self.length == 0:
            object.__setattr__(self, "length", n)
        elif self.length != n:
            raise TelemetryError("declared length does not match channel arrays")
        if self.start_time.tzinfo is None:
            object.__setattr__(self, "start_time", self.start_time.replace(tzinfo=timezone.utc))

    def values(self, channel: ChannelId) -> np.ndarray:
        return self._channel(channel).values

    def missing(self, channel: ChannelId) -> np.ndarray:
        return self._channel(channel).missing

    def _channel(self, channel: ChannelId) -> ChannelData:
        try:
            return self.channels[channel]
        except KeyError:
            raise TelemetryError(f"channel {channel.value!r} not present in well {self.well_id!r}") from None

    def tick_time(self, tick: int) -> datetime:
        return datetime.fromtimestamp(
            self.start_time.timestamp() + tick * self.tick_seconds, tz=timezone.utc
        )


@dataclass(frozen=True)
class Interval:
    """Half-open tick window [start_tick, end_tick) over a series.

    A zero-copy view: channel accessors return numpy views into the parent
    arrays. Canonical detection intervals are 720 ticks (2 hours).
    """

    series: TelemetrySeries
    start_tick: int
    end_tick: int

    def __post_init__(self):
        if not (0 <= self.start_tick < self.end_tick <= self.series.length):
            raise TelemetryError(
                f"interval [{self.start_tick}, {self.end_tick}) out of range "
                f"for series of length {self.series.length}"
            )

    @property
    def length(self) -> int:
        return self.end_tick - self.start_tick

    def values(self, channel: ChannelId) -> np.ndarray:
        return self.series.values(channel)[self.start_tick:self.end_tick]

    def missing(self, channel: ChannelId) -> np.ndarray:
        return self.series.missing(channel)[self.start_tick:self.end_tick]

    def has_channel(self, channel: ChannelId) -> bool:
        return channel in self.series.channels


def slice_interval(series: TelemetrySeries, start_tick: int, end_tick: int) -> Interval:
    """Zero-copy view of [start_tick, end_tick); bounds checked."""
    return Interval(series, start_tick, end_tick)


def missing_fraction(interval: Interval, channel: ChannelId) -> float:
    """Fraction of masked ticks for `channel` within the interval."""
    return float(np.mean(interval.missing(channel)))


# --- CSV ingestion -----------------------------------------------------------
#
# Format: header `time,<channel names...>`; time is ISO-8601 or integer epoch
# seconds; an empty cell is a missing sample. The writer emits exactly this
# format with epoch-second timestamps.


def _parse_time(cell: str) -> float:
    cell = cell.strip()
    try:
        return float(cell)
    except ValueError:
        pass
    try:
        dt = datetime.fromisoformat(cell.replace("Z", "+00:00"))
    except ValueError:
        raise TelemetryError(f"unparseable timestamp {cell!r}") from None
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.timestamp()


def parse_csv(
    path: str | Path,
    schema: Optional[Mapping[str, ChannelId]] = None,
    well_id: Optional[str] = None,
) -> TelemetrySeries:
    """Read a telemetry CSV and grid it onto 10-second ticks.

    `schema` maps header names to channels; by default headers must equal the
    canonical channel names. Unknown columns are ignored with a warning. Raw
    samples snap to the nearest tick, last write wins; ticks with no sample
    are missing.
    """
    path = Path(path)
    if schema is None:
        schema = {c.value: c for c in ChannelId}
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise TelemetryError(f"{path}: empty file") from None
        if not header or header[0].strip() != "time":
            raise TelemetryError(f"{path}: first column must be 'time'")
        columns: list[Optional[ChannelId]] = []
        for name in header[1:]:
            cid = schema.get(name.strip())
            if cid is None:
                warnings.warn(f"{path}: ignoring unknown channel column {name!r}")
            columns.append(cid)

        times: list[float] = []
        rows: list[list[float]] = []
        prev_t = -np.inf
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise TelemetryError(f"{path}:{lineno}: expected {len(header)} cells, got {len(row)}")
            t = _parse_time(row[0])
            if t < prev_t:
                raise TelemetryError(f"{path}:{lineno}: non-monotone timestamp")
            prev_t = t
            parsed = []
            for cell, cid in zip(row[1:], columns):
                cell = cell.strip()
                if cid is None:
                    continue
                if cell == "":
                    parsed.append(np.nan)
                else:
                    try:
                        parsed.append(float(cell))
                    except ValueError:
                        raise TelemetryError(f"{path}:{lineno}: malformed value {cell!r}") from None
            times.append(t)
            rows.append(parsed)

    if not times:
        raise TelemetryError(f"{path}: no data rows")

    kept = [cid for cid in columns if cid is not None]
    t0 = times[0]
    ticks = np.rint((np.asarray(times) - t0) / TICK_SECONDS).astype(np.int64)
    length = int(ticks[-1]) + 1
    data = np.full((length, len(kept)), np.nan)
    data[ticks] = np.asarray(rows)  # fancy assignment: later rows overwrite earlier ticks

    channels = {
        cid: ChannelData(values=data[:, k], missing=np.isnan(data[:, k]))
        for k, cid in enumerate(kept)
    }
    start = datetime.fromtimestamp(round(t0 / TICK_SECONDS) * TICK_SECONDS, tz=timezone.utc)
    return TelemetrySeries(
        well_id=well_id if well_id is not None else path.stem,
        start_time=start,
        channels=channels,
    )


def write_csv(series: TelemetrySeries, path: str | Path) -> None:
    """Write the exact CSV format parse_csv reads (epoch-second timestamps,
    empty cell for missing). write → parse round-trips the series."""
    path = Path(path)
    order = [c for c in ChannelId if c in series.channels]
    t0 = int(series.start_time.timestamp())
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["time"] + [c.value for c in order])
        for tick in range(series.length):
            row: list[str] = [str(t0 + tick * series.tick_seconds)]
            for c in order:
                ch = series.channels[c]
                row.append("" if ch.missing[tick] else repr(float(ch.values[tick])))
            writer.writerow(row)
