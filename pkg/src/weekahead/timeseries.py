"""Hourly time series, CSV ingestion and weekly windowing.

Hours inside a week are addressed 1..168 at the public boundary (hour 1 is
00:00-01:00 of the week's first day) and stored 0-based internally.
"""

from __future__ import annotations

import csv
import enum
import logging
import math
import os
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .exceptions import DataError

logger = logging.getLogger(__name__)

HOURS_PER_DAY = 24
DAYS_PER_WEEK = 7
HOURS_PER_WEEK = HOURS_PER_DAY * DAYS_PER_WEEK


class Day(enum.IntEnum):
    MON = 0
    TUE = 1
    WED = 2
    THU = 3
    FRI = 4
    SAT = 5
    SUN = 6

    @classmethod
    def parse(cls, value: "Day | str | int") -> "Day":
        if isinstance(value, cls):
            return value
        if isinstance(value, (int, np.integer)):
            return cls(int(value))
        key = str(value).strip().upper()[:3]
        try:
            return cls[key]
        except KeyError:
            raise DataError(f"unknown day of week: {value!r}") from None


def _readonly(values) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class HourlyTimeseries:
    """A calendar-indexed hourly series in MW.

    Parameters
    ----------
    values : array_like
        One finite value per hour, in chronological order.
    start_day_of_week : Day
        Day of week of the first sample (which starts at 00:00).
    name : str
        Series label, used as the CSV column header.
    """

    values: np.ndarray
    start_day_of_week: Day = Day.MON
    name: str = "series"

    def __post_init__(self):
        values = _readonly(self.values)
        if values.ndim != 1 or values.size < 1:
            raise DataError("an hourly series needs a 1-d array with at least one value")
        if not np.all(np.isfinite(values)):
            bad = int(np.flatnonzero(~np.isfinite(values))[0])
            raise DataError(f"non-finite value at hour {bad} of series {self.name!r}")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "start_day_of_week", Day.parse(self.start_day_of_week))

    def __len__(self) -> int:
        return self.values.size

    def day_of_week(self, i: int) -> Day:
        return Day((self.start_day_of_week + i // HOURS_PER_DAY) % DAYS_PER_WEEK)

    def hour_of_day(self, i: int) -> int:
        return i % HOURS_PER_DAY

    def first_aligned_hour(self, anchor: Day | str = Day.MON) -> int:
        """Index of the first sample falling at 00:00 on ``anchor``."""
        anchor = Day.parse(anchor)
        return HOURS_PER_DAY * ((anchor - self.start_day_of_week) % DAYS_PER_WEEK)

    def n_weeks(self, anchor: Day | str = Day.MON) -> int:
        usable = len(self) - self.first_aligned_hour(anchor)
        return max(usable, 0) // HOURS_PER_WEEK

    def shifted(self, offset: float) -> "HourlyTimeseries":
        return HourlyTimeseries(self.values + offset, self.start_day_of_week, self.name)

    def renamed(self, name: str) -> "HourlyTimeseries":
        return HourlyTimeseries(self.values, self.start_day_of_week, name)


@dataclass(frozen=True)
class WindowLayout:
    """Observation/forecast split of a week, with 1-based inclusive hour bounds."""

    obs_start: int
    obs_end: int
    fcst_start: int
    fcst_end: int = HOURS_PER_WEEK
    name: str = field(default="custom", compare=False)

    def __post_init__(self):
        bounds = (self.obs_start, self.obs_end, self.fcst_start, self.fcst_end)
        if any(int(b) != b for b in bounds):
            raise DataError(f"layout bounds must be integers, got {bounds}")
        if self.obs_start < 1 or self.fcst_end > HOURS_PER_WEEK:
            raise DataError(f"layout hours must lie in 1..{HOURS_PER_WEEK}, got {bounds}")
        if self.obs_end < self.obs_start or self.fcst_end < self.fcst_start:
            raise DataError(f"empty layout range in {bounds}")
        if self.fcst_start != self.obs_end + 1:
            raise DataError("forecast hours must begin right after the observation hours")

    @property
    def n_obs(self) -> int:
        return self.obs_end - self.obs_start + 1

    @property
    def n_fcst(self) -> int:
        return self.fcst_end - self.fcst_start + 1

    @property
    def width(self) -> int:
        return self.n_obs + self.n_fcst

    @property
    def obs_slice(self) -> slice:
        return slice(self.obs_start - 1, self.obs_end)

    @property
    def fcst_slice(self) -> slice:
        return slice(self.fcst_start - 1, self.fcst_end)

    @property
    def window_slice(self) -> slice:
        return slice(self.obs_start - 1, self.fcst_end)

    def obs_hours(self) -> np.ndarray:
        """1-based hour-of-week indices of the observed block."""
        return np.arange(self.obs_start, self.obs_end + 1)

    def fcst_hours(self) -> np.ndarray:
        return np.arange(self.fcst_start, self.fcst_end + 1)


MONDAY_LAYOUT = WindowLayout(1, 24, 25, 168, name="monday")
TUESDAY_LAYOUT = WindowLayout(25, 48, 49, 168, name="tuesday")

LAYOUTS = {"monday": MONDAY_LAYOUT, "tuesday": TUESDAY_LAYOUT}


def get_layout(layout: WindowLayout | str) -> WindowLayout:
    if isinstance(layout, WindowLayout):
        return layout
    try:
        return LAYOUTS[str(layout).lower()]
    except KeyError:
        raise DataError(f"unknown layout {layout!r}; expected one of {sorted(LAYOUTS)}") from None


def slice_weeks(ts: HourlyTimeseries, anchor: Day | str = Day.MON) -> np.ndarray:
    """Split a series into consecutive full weeks starting at 00:00 on ``anchor``.

    Returns a read-only ``(n_weeks, 168)`` array. Leading hours before the
    first ``anchor`` midnight and a trailing partial week are dropped.
    """
    start = ts.first_aligned_hour(anchor)
    n = ts.n_weeks(anchor)
    if n < 1:
        raise DataError(
            f"series {ts.name!r} of {len(ts)} hours does not contain a full week "
            f"starting on {Day.parse(anchor).name}"
        )
    stop = start + n * HOURS_PER_WEEK
    dropped = len(ts) - stop
    if dropped:
        logger.debug("slice_weeks: dropped %d trailing hours of %r", dropped, ts.name)
    weeks = ts.values[start:stop].reshape(n, HOURS_PER_WEEK)
    weeks.setflags(write=False)
    return weeks


def extract_window(week: Sequence[float], layout: WindowLayout | str) -> tuple[np.ndarray, np.ndarray]:
    """Return the (observed, forecast) blocks of one 168-hour week."""
    layout = get_layout(layout)
    week = np.asarray(week, dtype=float)
    if week.shape != (HOURS_PER_WEEK,):
        raise DataError(f"a week vector has {HOURS_PER_WEEK} entries, got shape {week.shape}")
    return week[layout.obs_slice].copy(), week[layout.fcst_slice].copy()


def week_table(ts: HourlyTimeseries, anchor: Day | str = Day.MON) -> list[dict]:
    """Index-to-day-range mapping of the aligned weeks, days counted from 0."""
    start = ts.first_aligned_hour(anchor)
    rows = []
    for w in range(ts.n_weeks(anchor)):
        h0 = start + w * HOURS_PER_WEEK
        rows.append(
            {
                "week": w,
                "start_hour": h0,
                "first_day": h0 // HOURS_PER_DAY,
                "last_day": (h0 + HOURS_PER_WEEK) // HOURS_PER_DAY - 1,
            }
        )
    return rows


def week_containing_day(ts: HourlyTimeseries, day: int, anchor: Day | str = Day.MON) -> int:
    """Aligned-week index whose 7 days include day ``day`` (0-based)."""
    offset = day * HOURS_PER_DAY - ts.first_aligned_hour(anchor)
    if offset < 0:
        raise DataError(f"day {day} precedes the first aligned week")
    week = offset // HOURS_PER_WEEK
    if week >= ts.n_weeks(anchor):
        raise DataError(f"day {day} falls after the last complete week")
    return int(week)


# -- CSV ----------------------------------------------------------------------


def _format_value(x: float) -> str:
    # repr gives the shortest string that parses back to the same double
    return repr(float(x))


def export_csv(series: Iterable[HourlyTimeseries], path: str | os.PathLike) -> None:
    """Write series side by side as ``hour,<name-1>,...`` (hour is 0-based)."""
    series = list(series)
    if not series:
        raise DataError("nothing to export")
    n = len(series[0])
    if any(len(s) != n for s in series):
        raise DataError("all exported series must have the same length")
    names = [s.name for s in series]
    if len(set(names)) != len(names) or "hour" in names:
        raise DataError(f"column names must be unique and not 'hour': {names}")
    if not str(path):
        raise DataError("empty output path")
    columns = [s.values for s in series]
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["hour", *names])
            for i in range(n):
                writer.writerow([i, *(_format_value(c[i]) for c in columns)])
    except OSError as exc:
        raise DataError(f"cannot write {path}: {exc}") from exc


def read_table(path: str | os.PathLike) -> tuple[list[str], list[list[str]]]:
    if not os.path.isfile(path):
        raise DataError(f"no such file: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [row for row in csv.reader(fh) if row]
    if not rows:
        raise DataError(f"{path} is empty")
    header = [h.strip() for h in rows[0]]
    return header, rows[1:]


def _parse_series(path, header, rows, column, start_day) -> HourlyTimeseries:
    if column not in header:
        raise DataError(f"column {column!r} not found in {path}; available: {header}")
    if "hour" not in header:
        raise DataError(f"{path} has no 'hour' column")
    col = header.index(column)
    hour_col = header.index("hour")
    values = np.empty(len(rows))
    for i, row in enumerate(rows):
        # data rows are numbered from 1, the header being row 0
        lineno = i + 1
        if len(row) != len(header):
            raise DataError(f"row {lineno} of {path} has {len(row)} fields, expected {len(header)}")
        try:
            hour = int(row[hour_col])
        except ValueError:
            raise DataError(f"row {lineno} of {path}: non-integer hour {row[hour_col]!r}") from None
        if hour != i:
            raise DataError(f"gap in hourly sequence of {path} at row {lineno}: expected hour {i}, found {hour}")
        try:
            values[i] = float(row[col])
        except ValueError:
            raise DataError(f"row {lineno} of {path}: non-numeric value {row[col]!r} in column {column!r}") from None
        if not math.isfinite(values[i]):
            raise DataError(f"row {lineno} of {path}: non-finite value in column {column!r}")
    if values.size == 0:
        raise DataError(f"{path} has no data rows")
    return HourlyTimeseries(values, start_day, column)


def ingest_csv(path: str | os.PathLike, column: str, start_day: Day | str = Day.MON) -> HourlyTimeseries:
    """Read one column of an hourly CSV file.

    The starting day of week is not stored in the file and must be given.
    """
    header, rows = read_table(path)
    return _parse_series(path, header, rows, column, start_day)


def ingest_dataset(path: str | os.PathLike, start_day: Day | str = Day.MON) -> dict[str, HourlyTimeseries]:
    """Read every value column of an hourly CSV file, keyed by column name."""
    header, rows = read_table(path)
    return {name: _parse_series(path, header, rows, name, start_day) for name in header if name != "hour"}
