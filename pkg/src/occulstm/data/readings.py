"""Sensor log parsing, day splitting, normalization, and windowing."""

from __future__ import annotations

import csv
import io
import logging
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import TextIO

import numpy as np

from occulstm.errors import (
    EmptyInput,
    InsufficientDays,
    MalformedRow,
    MissingLabel,
    NonMonotonicTimestamp,
)

logger = logging.getLogger(__name__)

FEATURES = ("temp", "hum", "co2", "noise", "pressure")
HEADER = ("timestamp", *FEATURES, "people")
SECONDS_PER_DAY = 86_400

# Index of the CO2 column in a feature vector
CO2 = FEATURES.index("co2")


@dataclass(frozen=True)
class SensorReading:
    """One timestamped row of the five environmental features."""

    timestamp: int
    temperature: float
    humidity: float
    co2: float
    noise: float
    pressure: float
    people: int | None = None

    @property
    def day(self) -> int:
        """UTC calendar day index (days since the epoch)."""
        return self.timestamp // SECONDS_PER_DAY

    def features(self) -> tuple[float, float, float, float, float]:
        return (self.temperature, self.humidity, self.co2, self.noise, self.pressure)


DayGroup = list[SensorReading]


@dataclass(frozen=True)
class DatasetSplit:
    """Day-groups assigned chronologically to training, validation and test."""

    train: list[DayGroup]
    val: list[DayGroup]
    test: list[DayGroup]


@dataclass(frozen=True)
class NormStats:
    """Per-feature z-score parameters fit on the training days."""

    mean: np.ndarray
    std: np.ndarray

    def apply(self, x: np.ndarray) -> np.ndarray:
        return (x - self.mean) / self.std

    def invert(self, z: np.ndarray) -> np.ndarray:
        return z * self.std + self.mean


@dataclass(frozen=True)
class WindowedDataset:
    """Normalized windows ``[num_windows, window_len, 5]`` with aligned labels.

    ``labels`` holds the people count of each window's last reading, or -1 for
    unlabeled input. ``timestamps`` and ``last_co2`` describe that same reading.
    """

    windows: np.ndarray
    labels: np.ndarray
    timestamps: np.ndarray
    last_co2: np.ndarray
    window_len: int
    stride: int
    skipped_days: int = 0

    def __len__(self) -> int:
        return int(self.windows.shape[0])

    @property
    def labeled(self) -> bool:
        return bool(len(self) == 0 or np.all(self.labels >= 0))

    def subset(self, index: np.ndarray | slice) -> WindowedDataset:
        """Select windows by index, keeping all aligned arrays in step."""
        return WindowedDataset(
            windows=self.windows[index],
            labels=self.labels[index],
            timestamps=self.timestamps[index],
            last_co2=self.last_co2[index],
            window_len=self.window_len,
            stride=self.stride,
        )


def _parse_timestamp(raw: str) -> int:
    raw = raw.strip()
    try:
        return int(raw)
    except ValueError:
        pass
    parsed = datetime.fromisoformat(raw.replace("Z", "+00:00"))
    if parsed.tzinfo is None:
        parsed = parsed.replace(tzinfo=timezone.utc)
    return int(parsed.timestamp())


def _parse_row(row: list[str], line: int) -> SensorReading:
    if len(row) != len(HEADER):
        raise MalformedRow(line, f"expected {len(HEADER)} columns, got {len(row)}")
    try:
        timestamp = _parse_timestamp(row[0])
    except ValueError:
        raise MalformedRow(line, f"unparsable timestamp {row[0]!r}") from None
    try:
        temp, hum, co2, noise, pressure = (float(v) for v in row[1:6])
    except ValueError as e:
        raise MalformedRow(line, str(e)) from None
    people_raw = row[6].strip()
    people: int | None = None
    if people_raw:
        try:
            people = int(people_raw)
        except ValueError:
            raise MalformedRow(line, f"people count {people_raw!r} is not an integer") from None
        if people < 0:
            raise MalformedRow(line, f"people count {people} is negative")

    values = np.array([temp, hum, co2, noise, pressure])
    if not np.all(np.isfinite(values)):
        raise MalformedRow(line, "non-finite sensor value")
    if co2 <= 0:
        raise MalformedRow(line, f"co2 must be positive, got {co2}")
    if not 0 <= hum <= 100:
        raise MalformedRow(line, f"humidity {hum} outside [0, 100]")
    if pressure <= 0:
        raise MalformedRow(line, f"pressure must be positive, got {pressure}")
    return SensorReading(timestamp, temp, hum, co2, noise, pressure, people)


def parse_sensor_csv(source: str | TextIO, *, labeled: bool = False) -> list[SensorReading]:
    """Parse ``timestamp,temp,hum,co2,noise,pressure,people`` rows in file order.

    Args:
        source: CSV text or an open text stream. The header row is mandatory and
            matched case-insensitively.
        labeled: Require a people count on every row.

    Returns:
        One reading per data row. ``people`` is ``None`` where the column is empty.
    """
    stream = io.StringIO(source) if isinstance(source, str) else source
    reader = csv.reader(stream)
    header = next(reader, None)
    if header is None:
        raise MalformedRow(1, "missing header row")
    if tuple(h.strip().lower() for h in header) != HEADER:
        raise MalformedRow(1, f"header must be {','.join(HEADER)}")

    readings: list[SensorReading] = []
    for row in reader:
        line = reader.line_num
        if not row:
            continue
        reading = _parse_row(row, line)
        if labeled and reading.people is None:
            raise MissingLabel(line)
        if readings and reading.timestamp <= readings[-1].timestamp:
            raise NonMonotonicTimestamp(line, readings[-1].timestamp, reading.timestamp)
        readings.append(reading)
    return readings


def write_sensor_csv(readings: Iterable[SensorReading]) -> str:
    """Serialize readings with integer-epoch timestamps and exact float text."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(HEADER)
    for r in readings:
        people = "" if r.people is None else str(r.people)
        writer.writerow([str(r.timestamp), *(repr(float(v)) for v in r.features()), people])
    return out.getvalue()


def group_by_day(readings: Sequence[SensorReading]) -> list[DayGroup]:
    """Group readings by UTC calendar day, in chronological order."""
    groups: dict[int, DayGroup] = {}
    for r in readings:
        groups.setdefault(r.day, []).append(r)
    return [groups[day] for day in sorted(groups)]


def split_by_days(readings: Sequence[SensorReading], n_train: int, n_val: int, n_test: int) -> DatasetSplit:
    """Assign the earliest days to training, the next to validation, the last to test."""
    days = group_by_day(readings)
    required = n_train + n_val + n_test
    if len(days) < required:
        raise InsufficientDays(required, len(days))
    test_start = len(days) - n_test
    if len(days) > required:
        logger.info("using %d of %d days; middle days beyond the split are dropped", required, len(days))
    return DatasetSplit(
        train=days[:n_train],
        val=days[n_train : n_train + n_val],
        test=days[test_start:],
    )


def _feature_matrix(day_groups: Iterable[DayGroup]) -> np.ndarray:
    rows = [r.features() for group in day_groups for r in group]
    return np.asarray(rows, dtype=np.float64).reshape(-1, len(FEATURES))


def compute_norm_stats(day_groups: Iterable[DayGroup]) -> NormStats:
    """Population mean and standard deviation per feature; zero deviations become 1."""
    x = _feature_matrix(day_groups)
    if x.shape[0] == 0:
        raise EmptyInput("cannot compute normalization statistics from zero readings")
    std = x.std(axis=0)
    return NormStats(mean=x.mean(axis=0), std=np.where(std == 0, 1.0, std))


def make_windows(day_groups: Iterable[DayGroup], stats: NormStats, window_len: int, stride: int = 1) -> WindowedDataset:
    """Cut each day into normalized windows that never cross a day boundary.

    A day with ``R`` rows yields ``(R - window_len) // stride + 1`` windows, or none
    when ``R < window_len``. Each window is labeled with its final reading.
    """
    if window_len < 1 or stride < 1:
        raise ValueError("window_len and stride must be at least 1")

    windows, labels, stamps, co2 = [], [], [], []
    skipped = 0
    for group in day_groups:
        if len(group) < window_len:
            skipped += 1
            continue
        x = stats.apply(_feature_matrix([group]))
        # (n, 5, window_len) -> (n, window_len, 5)
        view = np.lib.stride_tricks.sliding_window_view(x, window_len, axis=0)[::stride]
        windows.append(view.transpose(0, 2, 1))
        ends = np.arange(window_len - 1, len(group), stride)[: view.shape[0]]
        labels.append([-1 if group[e].people is None else group[e].people for e in ends])
        stamps.append([group[e].timestamp for e in ends])
        co2.append([group[e].co2 for e in ends])

    if skipped:
        logger.info("%d day(s) shorter than %d readings contributed no windows", skipped, window_len)
    if not windows:
        return WindowedDataset(
            windows=np.empty((0, window_len, len(FEATURES))),
            labels=np.empty(0, dtype=np.int64),
            timestamps=np.empty(0, dtype=np.int64),
            last_co2=np.empty(0),
            window_len=window_len,
            stride=stride,
            skipped_days=skipped,
        )
    return WindowedDataset(
        windows=np.ascontiguousarray(np.concatenate(windows)),
        labels=np.concatenate([np.asarray(v, dtype=np.int64) for v in labels]),
        timestamps=np.concatenate([np.asarray(v, dtype=np.int64) for v in stamps]),
        last_co2=np.concatenate([np.asarray(v, dtype=np.float64) for v in co2]),
        window_len=window_len,
        stride=stride,
        skipped_days=skipped,
    )


def co2_alerts(last_co2: np.ndarray, threshold: float) -> np.ndarray:
    """Flag windows whose latest raw CO2 reading is at or above ``threshold`` ppm."""
    return np.asarray(last_co2) >= threshold
