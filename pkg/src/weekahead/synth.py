"""Seeded synthetic year of hourly system load and merit-order dispatch.

The load is a fixed weekly profile modulated by an annual cycle peaking
in mid-December and by weekly random perturbations. The perturbation of
Tuesday-Sunday is driven by one latent factor per week; Monday has its own
factor that is only partly correlated with it, which reproduces a weak
Monday-to-rest-of-week correlation.

Random numbers come from numpy's PCG64 bit generator seeded with
``SynthConfig.seed``.
"""

from __future__ import annotations

import configparser
import os
from dataclasses import dataclass, fields, replace

import numpy as np

from .exceptions import DataError
from .timeseries import (
    DAYS_PER_WEEK,
    HOURS_PER_DAY,
    HOURS_PER_WEEK,
    Day,
    HourlyTimeseries,
    export_csv,
)

PEAK_DAY_OF_YEAR = 351  # Dec 17, 1-based
DEFAULT_SEED = 9


@dataclass(frozen=True)
class SynthConfig:
    seed: int = DEFAULT_SEED
    days: int = 365
    peak_load: float = 12926.0
    n_generators: int = 8
    monday_decorrelation: float = 0.8
    daily_shape_noise: float = 0.03
    seasonal_amplitude: float = 0.15
    weekly_factor_std: float = 0.10
    start_day: Day = Day.MON

    def __post_init__(self):
        if self.days < 28:
            raise DataError(f"days must be at least 28, got {self.days}")
        if not self.peak_load > 0:
            raise DataError(f"peak_load must be positive, got {self.peak_load}")
        if self.n_generators < 1:
            raise DataError("need at least one generator")
        if not 0.0 <= self.monday_decorrelation <= 1.0:
            raise DataError("monday_decorrelation must lie in [0, 1]")
        if self.daily_shape_noise < 0 or self.weekly_factor_std < 0 or self.seasonal_amplitude < 0:
            raise DataError("noise and amplitude parameters must be non-negative")
        object.__setattr__(self, "start_day", Day.parse(self.start_day))

    @classmethod
    def from_mapping(cls, mapping) -> "SynthConfig":
        types = {f.name: f.type for f in fields(cls)}
        kwargs = {}
        for key, value in mapping.items():
            key = key.strip().replace("-", "_")
            if key not in types:
                raise DataError(f"unknown synth config key {key!r}")
            kwargs[key] = _coerce(key, value)
        return cls(**kwargs)

    @classmethod
    def from_file(cls, path: str | os.PathLike) -> "SynthConfig":
        """Read a flat ``key = value`` file (no section headers)."""
        return cls.from_mapping(read_flat_config(path))

    def with_overrides(self, **overrides) -> "SynthConfig":
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})


_INT_KEYS = {"seed", "days", "n_generators"}


def _coerce(key, value):
    if key == "start_day":
        return Day.parse(value)
    if isinstance(value, str):
        value = value.strip()
    try:
        return int(value) if key in _INT_KEYS else float(value)
    except ValueError:
        raise DataError(f"bad value for {key}: {value!r}") from None


def read_flat_config(path: str | os.PathLike) -> dict[str, str]:
    if not os.path.isfile(path):
        raise DataError(f"no such config file: {path}")
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    with open(path, encoding="utf-8") as fh:
        try:
            parser.read_string("[top]\n" + fh.read())
        except configparser.Error as exc:
            raise DataError(f"cannot parse {path}: {exc}") from exc
    return dict(parser["top"])


def _bump(h, center, width):
    return np.exp(-0.5 * ((h - center) / width) ** 2)


def base_week_shape(start_day: Day = Day.MON) -> np.ndarray:
    """Relative 168-hour load profile beginning at 00:00 of ``start_day``.

    Weekdays have a morning and a stronger evening peak; weekends have a
    softer morning peak and sit about 10% lower.
    """
    h = np.arange(HOURS_PER_DAY, dtype=float)
    weekday = 0.62 + 0.16 * _bump(h, 8.5, 2.0) + 0.26 * _bump(h, 18.5, 2.5) + 0.10 * _bump(h, 13.0, 4.0)
    weekend = 0.9 * (0.64 + 0.08 * _bump(h, 10.0, 2.5) + 0.22 * _bump(h, 18.5, 2.5) + 0.08 * _bump(h, 13.0, 4.0))
    days = []
    for d in range(DAYS_PER_WEEK):
        dow = (start_day + d) % DAYS_PER_WEEK
        days.append(weekend if dow >= Day.SAT else weekday)
    shape = np.concatenate(days)
    return shape / shape.max()


def seasonal_factor(hours, amplitude: float) -> np.ndarray:
    """``1 + amplitude * cos(2 pi (day - 351) / 365)``, constant within each 1-based day."""
    day = 1.0 + np.floor_divide(np.asarray(hours), HOURS_PER_DAY)
    return 1.0 + amplitude * np.cos(2.0 * np.pi * (day - PEAK_DAY_OF_YEAR) / 365.0)


def weekly_perturbation(cfg: SynthConfig, rng: np.random.Generator) -> np.ndarray:
    """Relative perturbation ``eps(t)`` for every hour of the year.

    Each calendar week (Monday-based) draws a Tue-Sun factor ``z`` and a
    Monday factor ``rho * z + sqrt(1 - rho**2) * u`` with
    ``rho = 1 - monday_decorrelation``; every day adds its own
    ``N(0, daily_shape_noise**2)`` term. The perturbation is constant
    within a day, so every day's deviation from the base shape is a single
    scalar multiple of it.
    """
    n_days = cfg.days
    # days before the first Monday belong to week 0 together with that week
    first_monday = (Day.MON - cfg.start_day) % DAYS_PER_WEEK
    day = np.arange(n_days)
    week_id = np.floor_divide(day - first_monday, DAYS_PER_WEEK) + 1
    n_weeks = int(week_id.max()) + 1
    rho = 1.0 - cfg.monday_decorrelation
    z = rng.standard_normal(n_weeks)
    u = rng.standard_normal(n_weeks)
    monday = rho * z + np.sqrt(1.0 - rho**2) * u
    daily = cfg.daily_shape_noise * rng.standard_normal(n_days)

    dow = (cfg.start_day + day) % DAYS_PER_WEEK
    weekly = np.where(dow == Day.MON, monday[week_id], z[week_id])
    day_level = cfg.weekly_factor_std * weekly + daily

    return np.repeat(day_level, HOURS_PER_DAY)


def generate_load(cfg: SynthConfig = SynthConfig()) -> HourlyTimeseries:
    """One series of ``cfg.days * 24`` hourly total loads, max equal to ``cfg.peak_load``."""
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    n_hours = cfg.days * HOURS_PER_DAY
    hours = np.arange(n_hours)
    shape = base_week_shape(cfg.start_day)[hours % HOURS_PER_WEEK]
    eps = weekly_perturbation(cfg, rng)
    raw = shape * seasonal_factor(hours, cfg.seasonal_amplitude) * (1.0 + eps)
    if np.any(raw <= 0):
        raise DataError("perturbations too large: non-positive load generated")
    load = raw * (cfg.peak_load / raw.max())
    load[np.argmax(raw)] = cfg.peak_load
    return HourlyTimeseries(load, cfg.start_day, "total_load")


@dataclass(frozen=True)
class Generator:
    name: str
    capacity: float
    min_output: float


def default_fleet(load: HourlyTimeseries, n_generators: int, min_fraction: float = 0.15) -> list[Generator]:
    """Capacities sized to the load duration curve, listed in merit order.

    The middle unit (index ``n // 2``) covers the band between the 5th and
    90th load percentiles so it is the marginal unit most of the time; the
    cheaper units share the base below it and the dearer ones the peak
    above it, with 10% reserve.
    """
    values = load.values
    if n_generators == 1:
        cap = 1.1 * values.max()
        return [Generator("gen_1", cap, min(min_fraction * cap, 0.5 * values.min()))]
    lo, hi = np.quantile(values, [0.05, 0.90])
    mid = n_generators // 2
    n_peak = n_generators - mid - 1
    caps = [lo / mid] * mid + [hi - lo]
    if n_peak:
        caps += [(1.1 * values.max() - hi) / n_peak] * n_peak
    else:
        caps[-1] = 1.1 * values.max() - lo
    fleet = [Generator(f"gen_{i + 1}", c, min_fraction * c) for i, c in enumerate(caps)]
    return fleet


def dispatch(load: HourlyTimeseries, fleet: list[Generator]) -> list[HourlyTimeseries]:
    """Merit-order allocation of ``load`` over ``fleet`` (cheapest first).

    Every unit runs at least at its minimum output; the remaining load is
    filled in merit order up to each unit's capacity.
    """
    values = load.values
    if not np.all(values > 0):
        raise DataError("load must be positive to dispatch")
    caps = np.array([g.capacity for g in fleet])
    mins = np.array([g.min_output for g in fleet])
    if np.any(mins < 0) or np.any(mins > caps):
        raise DataError("generator minimum output must lie in [0, capacity]")
    if caps.sum() < values.max():
        raise DataError(f"total capacity {caps.sum():.6g} is below the peak load {values.max():.6g}")
    if mins.sum() > values.min():
        raise DataError("sum of minimum outputs exceeds the minimum load")
    remaining = values - mins.sum()
    outputs = []
    for g, cap, pmin in zip(fleet, caps, mins):
        extra = np.clip(remaining, 0.0, cap - pmin)
        remaining = remaining - extra
        outputs.append(pmin + extra)
    return [HourlyTimeseries(out, load.start_day_of_week, g.name) for g, out in zip(fleet, outputs)]


def generate_dispatch(load: HourlyTimeseries, cfg: SynthConfig = SynthConfig()) -> list[HourlyTimeseries]:
    """Per-generator hourly output for the default fleet of ``cfg.n_generators`` units."""
    return dispatch(load, default_fleet(load, cfg.n_generators))


def mid_rank_generator(n_generators: int) -> str:
    """Column name of the unit that is usually marginal."""
    return f"gen_{n_generators // 2 + 1}"


def generate_dataset(cfg: SynthConfig = SynthConfig()) -> tuple[HourlyTimeseries, list[HourlyTimeseries]]:
    load = generate_load(cfg)
    return load, generate_dispatch(load, cfg)


def export_dataset(load: HourlyTimeseries, dispatch_series, path: str | os.PathLike) -> None:
    """Write ``hour,total_load,gen_1,...`` CSV."""
    export_csv([load.renamed("total_load"), *dispatch_series], path)
