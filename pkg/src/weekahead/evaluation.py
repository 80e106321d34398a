"""Error metrics and the EGPR / standard GPR / ARIMA comparison harness."""

from __future__ import annotations

import json
import logging
import math
import os
from dataclasses import dataclass, field

import numpy as np

from . import baselines
from .egpr import EgprConfig, split_target, forecast
from .exceptions import DataError, WeekaheadError
from .timeseries import HOURS_PER_DAY, HOURS_PER_WEEK, Day, HourlyTimeseries, get_layout, ingest_csv, week_containing_day

logger = logging.getLogger(__name__)

METHODS = ("egpr", "gpr-se", "arima")

# 0-based day of year of 6/9, 8/11, 10/13 and 12/15 in a non-leap year
TEST_DAYS = (159, 222, 285, 348)


def _pair(forecast, reference):
    f = np.asarray(forecast, dtype=float)
    r = np.asarray(reference, dtype=float)
    if f.shape != r.shape:
        raise DataError(f"forecast and reference shapes differ: {f.shape} vs {r.shape}")
    if f.size == 0:
        raise DataError("empty forecast")
    return f, r


def mape(forecast, reference) -> float:
    """Mean absolute percentage error, in percent."""
    f, r = _pair(forecast, reference)
    if np.any(r == 0):
        raise DataError("MAPE is undefined for zero reference values")
    return float(100.0 * np.mean(np.abs(f - r) / np.abs(r)))


def rmse(forecast, reference) -> float:
    f, r = _pair(forecast, reference)
    return float(np.sqrt(np.mean((f - r) ** 2)))


def max_abs_error(forecast, reference) -> float:
    f, r = _pair(forecast, reference)
    return float(np.max(np.abs(f - r)))


def collapse_index(forecast, reference, prior_mean) -> float:
    """``mean|forecast - prior| / mean|reference - prior|``; near zero means the forecast fell back to the prior."""
    f, r = _pair(forecast, reference)
    m = np.broadcast_to(np.asarray(prior_mean, dtype=float), f.shape)
    denom = np.mean(np.abs(r - m))
    if denom == 0:
        return 0.0 if np.all(f == m) else math.inf
    return float(np.mean(np.abs(f - m)) / denom)


def default_test_weeks(history: HourlyTimeseries) -> list[int]:
    """Aligned-week indices containing mid-June, mid-August, mid-October and mid-December."""
    return [week_containing_day(history, day, Day.MON) for day in TEST_DAYS]


# -- per-method protocols -------------------------------------------------------


@dataclass
class MethodForecast:
    mean: np.ndarray
    std: np.ndarray | None
    prior_mean: np.ndarray
    info: dict = field(default_factory=dict)


def _fcst_start(history, week, layout):
    return history.first_aligned_hour(Day.MON) + week * HOURS_PER_WEEK + layout.fcst_start - 1


def run_egpr(history, week, layout, ensemble_size=None) -> MethodForecast:
    cfg = EgprConfig(layout, ensemble_size)
    res = forecast(history, week, cfg)
    return MethodForecast(res.mean, res.std, res.prior_mean, {"ensemble_size": cfg.ensemble_size})


def run_gpr_se(history, week, layout, form="printed") -> MethodForecast:
    """Train on the previous calendar week, forecast the target's forecast hours."""
    layout = get_layout(layout)
    week_start = history.first_aligned_hour(Day.MON) + week * HOURS_PER_WEEK
    if week_start < HOURS_PER_WEEK:
        raise DataError("standard GPR needs the week before the target")
    t_train = np.arange(week_start - HOURS_PER_WEEK, week_start)
    t_fcst = np.arange(layout.n_fcst) + _fcst_start(history, week, layout)
    res, fit = baselines.gpr_se_forecast(history.values[t_train], t_fcst, t_train, form=form, return_fit=True)
    info = {"sigma": fit.params.sigma, "gamma": fit.params.gamma, "const_mean": fit.const_mean}
    return MethodForecast(res.mean, res.std, np.full(layout.n_fcst, fit.const_mean), info)


def arima_training_days(layout) -> int:
    """Seven days before a six-day forecast, six before a five-day one."""
    return get_layout(layout).n_fcst // HOURS_PER_DAY + 1


def run_arima(history, week, layout, p=None, d=1, p_max=24) -> MethodForecast:
    layout = get_layout(layout)
    start = _fcst_start(history, week, layout)
    n_train = arima_training_days(layout) * HOURS_PER_DAY
    if start < n_train:
        raise DataError("not enough history before the forecast for ARIMA training")
    train = history.values[start - n_train : start]
    model = baselines.ARIForecaster(p=p, d=d, p_max=p_max).fit(train)
    mean, std = model.predict(layout.n_fcst, return_std=True)
    # no unconditional mean exists for d >= 1; the training level stands in
    prior = np.full(layout.n_fcst, float(train.mean()))
    return MethodForecast(mean, std, prior, {"order": list(model.order_), "train_hours": n_train})


RUNNERS = {"egpr": run_egpr, "gpr-se": run_gpr_se, "arima": run_arima}


# -- reports --------------------------------------------------------------------


@dataclass
class MethodRecord:
    method: str
    mean: list[float] | None = None
    std: list[float] | None = None
    prior_mean: list[float] | None = None
    mape: float | None = None
    rmse: float | None = None
    max_abs_error: float | None = None
    collapse_index: float | None = None
    info: dict = field(default_factory=dict)
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass
class ComparisonReport:
    series: str
    target_week: int
    layout: str
    hours: list[int]
    reference: list[float]
    records: dict[str, MethodRecord]

    def to_dict(self) -> dict:
        return {
            "series": self.series,
            "target_week": self.target_week,
            "layout": self.layout,
            "hours": list(self.hours),
            "reference": list(self.reference),
            "methods": {name: vars(rec).copy() for name, rec in sorted(self.records.items())},
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ComparisonReport":
        records = {name: MethodRecord(**rec) for name, rec in data["methods"].items()}
        return cls(data["series"], data["target_week"], data["layout"], data["hours"], data["reference"], records)

    def metric(self, name: str) -> dict[str, float]:
        return {m: getattr(r, name) for m, r in self.records.items() if r.ok}


def _record(method, fc: MethodForecast, reference) -> MethodRecord:
    return MethodRecord(
        method=method,
        mean=fc.mean.tolist(),
        std=None if fc.std is None else fc.std.tolist(),
        prior_mean=fc.prior_mean.tolist(),
        mape=mape(fc.mean, reference),
        rmse=rmse(fc.mean, reference),
        max_abs_error=max_abs_error(fc.mean, reference),
        collapse_index=collapse_index(fc.mean, reference, fc.prior_mean),
        info=fc.info,
    )


def compare_week(history: HourlyTimeseries, week: int, layout="tuesday", methods=METHODS, ensemble_size=None) -> ComparisonReport:
    layout = get_layout(layout)
    unknown = set(methods) - set(METHODS)
    if unknown:
        raise DataError(f"unknown methods: {sorted(unknown)}")
    _, reference = split_target(history, week, layout)
    if reference is None:
        raise DataError(f"week {week} has no complete reference for its forecast hours")
    records = {}
    for method in sorted(methods):
        try:
            if method == "egpr":
                fc = run_egpr(history, week, layout, ensemble_size)
            else:
                fc = RUNNERS[method](history, week, layout)
            records[method] = _record(method, fc, reference)
        except (WeekaheadError, ArithmeticError, ValueError) as exc:
            logger.warning("%s failed on week %d: %s", method, week, exc)
            records[method] = MethodRecord(method=method, error=f"{type(exc).__name__}: {exc}")
    return ComparisonReport(history.name, int(week), layout.name, layout.fcst_hours().tolist(), reference.tolist(), records)


def run_comparison(
    dataset, weeks, layouts=("tuesday",), methods=METHODS, series: str = "total_load", start_day=Day.MON
) -> list[ComparisonReport]:
    """One report per (week, layout), sorted by week then layout.

    ``dataset`` is a CSV path or an :class:`HourlyTimeseries`. Per-method
    failures are recorded in the report instead of aborting the batch.
    """
    history = dataset if isinstance(dataset, HourlyTimeseries) else ingest_csv(dataset, series, start_day)
    reports = []
    for week in sorted(weeks):
        for layout in layouts:
            reports.append(compare_week(history, week, layout, methods))
    return reports


def _finite(obj):
    if isinstance(obj, float):
        if not math.isfinite(obj):
            raise DataError(f"non-finite number in report: {obj}")
    elif isinstance(obj, dict):
        for v in obj.values():
            _finite(v)
    elif isinstance(obj, list):
        for v in obj:
            _finite(v)
    return obj


def reports_to_json(reports) -> str:
    payload = {"reports": [_finite(r.to_dict()) for r in reports]}
    return json.dumps(payload, indent=2, allow_nan=False)


def reports_from_json(text: str) -> list[ComparisonReport]:
    return [ComparisonReport.from_dict(d) for d in json.loads(text)["reports"]]


def write_reports(reports, path: str | os.PathLike) -> None:
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(reports_to_json(reports))
            fh.write("\n")
    except OSError as exc:
        raise DataError(f"cannot write {path}: {exc}") from exc
