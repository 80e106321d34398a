"""Ensemble GPR: weekly forecasts with priors estimated from preceding weeks.

The history is cut into Monday-aligned weeks. For target week ``Y`` the
ensemble is weeks ``Y - N .. Y - 1``; its sample mean and covariance are
the prior, which is then conditioned on the target week's own observed
hours.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .exceptions import DataError, InsufficientHistoryError
from .gp import ForecastResult, JointGaussian, condition
from .stats import WeeklyEnsemble, ensemble_covariance, ensemble_mean, sample_covariance
from .timeseries import (
    HOURS_PER_DAY,
    HOURS_PER_WEEK,
    Day,
    HourlyTimeseries,
    WindowLayout,
    get_layout,
    slice_weeks,
)

DEFAULT_ENSEMBLE_SIZE = {"monday": 20, "tuesday": 10}
FALLBACK_ENSEMBLE_SIZE = 10


def default_ensemble_size(layout: WindowLayout | str) -> int:
    return DEFAULT_ENSEMBLE_SIZE.get(get_layout(layout).name, FALLBACK_ENSEMBLE_SIZE)


@dataclass(frozen=True)
class EgprConfig:
    """Ensemble size, window layout and jitter for one EGPR forecast.

    ``ensemble_size=None`` picks 20 for the Monday layout and 10 otherwise.
    """

    layout: WindowLayout = field(default_factory=lambda: get_layout("tuesday"))
    ensemble_size: int | None = None
    jitter: float | None = None

    def __post_init__(self):
        layout = get_layout(self.layout)
        object.__setattr__(self, "layout", layout)
        if self.ensemble_size is None:
            object.__setattr__(self, "ensemble_size", default_ensemble_size(layout))
        if int(self.ensemble_size) != self.ensemble_size or self.ensemble_size < 2:
            raise DataError(f"ensemble size must be an integer >= 2, got {self.ensemble_size}")


def _check_target(history: HourlyTimeseries, target: int, n: int) -> int:
    n_weeks = history.n_weeks(Day.MON)
    if target < n:
        raise InsufficientHistoryError(
            f"target week {target} has only {target} preceding aligned weeks, need {n}"
        )
    if target > n_weeks:
        raise DataError(f"target week {target} is beyond the history ({n_weeks} complete weeks)")
    return n_weeks


def preceding_weeks(history: HourlyTimeseries, target_week_index: int, n: int) -> np.ndarray:
    """The ``n`` full 168-hour weeks right before the target, oldest first."""
    _check_target(history, target_week_index, n)
    weeks = slice_weeks(history, Day.MON)
    return weeks[target_week_index - n : target_week_index]


def build_ensemble(history: HourlyTimeseries, target_week_index: int, cfg: EgprConfig) -> WeeklyEnsemble:
    """Rows are weeks ``target - N .. target - 1`` restricted to the layout's hours."""
    weeks = preceding_weeks(history, target_week_index, cfg.ensemble_size)
    return WeeklyEnsemble(weeks[:, cfg.layout.window_slice], cfg.layout)


def target_week(history: HourlyTimeseries, target_week_index: int) -> np.ndarray:
    """Values of the target week; may be shorter than 168 at the end of the history."""
    start = history.first_aligned_hour(Day.MON) + target_week_index * HOURS_PER_WEEK
    return history.values[start : start + HOURS_PER_WEEK]


def split_target(history, target_week_index, layout):
    week = target_week(history, target_week_index)
    if week.size < layout.obs_end:
        raise DataError(f"observation hours of week {target_week_index} are not in the history")
    obs = week[layout.obs_slice]
    reference = week[layout.fcst_slice] if week.size >= layout.fcst_end else None
    return obs, reference


def forecast(history: HourlyTimeseries, target_week_index: int, cfg: EgprConfig | None = None) -> ForecastResult:
    """EGPR forecast of the target week's forecast hours."""
    cfg = cfg or EgprConfig()
    ens = build_ensemble(history, target_week_index, cfg)
    obs, _ = split_target(history, target_week_index, cfg.layout)
    model = JointGaussian(ensemble_covariance(ens), cfg.jitter)
    return condition(model, obs, cfg.layout, cfg.layout.fcst_hours())


@dataclass(frozen=True)
class ForecastReport:
    """Plot-ready bundle of one EGPR forecast."""

    series: str
    target_week: int
    layout: str
    ensemble_size: int
    hours: np.ndarray
    absolute_hours: np.ndarray
    mean: np.ndarray
    std: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    prior_mean: np.ndarray
    reference: np.ndarray | None
    ensemble: np.ndarray

    def to_dict(self) -> dict:
        out = {}
        for name in self.__dataclass_fields__:
            value = getattr(self, name)
            out[name] = value.tolist() if isinstance(value, np.ndarray) else value
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "ForecastReport":
        kwargs = dict(data)
        for name in ("hours", "absolute_hours"):
            kwargs[name] = np.asarray(kwargs[name], dtype=int)
        for name in ("mean", "std", "lower", "upper", "prior_mean", "ensemble"):
            kwargs[name] = np.asarray(kwargs[name], dtype=float)
        if kwargs.get("reference") is not None:
            kwargs["reference"] = np.asarray(kwargs["reference"], dtype=float)
        return cls(**kwargs)


def forecast_report(history: HourlyTimeseries, target_week_index: int, cfg: EgprConfig | None = None) -> ForecastReport:
    """Forecast plus the prior mean, a +/- 2 std band, the truth and the ensemble rows."""
    cfg = cfg or EgprConfig()
    ens = build_ensemble(history, target_week_index, cfg)
    obs, reference = split_target(history, target_week_index, cfg.layout)
    model = JointGaussian(ensemble_covariance(ens), cfg.jitter)
    result = condition(model, obs, cfg.layout, cfg.layout.fcst_hours())
    _, prior_fcst = ensemble_mean(ens)
    lower, upper = result.band(2.0)
    start = history.first_aligned_hour(Day.MON) + target_week_index * HOURS_PER_WEEK
    return ForecastReport(
        series=history.name,
        target_week=int(target_week_index),
        layout=cfg.layout.name,
        ensemble_size=int(cfg.ensemble_size),
        hours=cfg.layout.fcst_hours(),
        absolute_hours=start + cfg.layout.fcst_hours() - 1,
        mean=result.mean,
        std=result.std,
        lower=lower,
        upper=upper,
        prior_mean=prior_fcst,
        reference=None if reference is None else reference.copy(),
        ensemble=np.array(ens.realizations),
    )


def week_covariance(
    history: HourlyTimeseries, target_week_index: int, n: int, exclude_monday: bool = False
) -> np.ndarray:
    """Ensemble covariance of whole weeks (168 hours, or 144 without Monday)."""
    weeks = preceding_weeks(history, target_week_index, n)
    if exclude_monday:
        weeks = weeks[:, HOURS_PER_DAY:]
    return sample_covariance(weeks)


class EnsembleGPRegressor(RegressorMixin, BaseEstimator):
    """Estimator form of EGPR.

    ``fit`` takes an ``(N, W)`` matrix of weekly realizations (observed hours
    first); ``predict`` maps observed-hour rows to forecast-hour rows.

    Parameters
    ----------
    layout : str or WindowLayout, default="tuesday"
    jitter : float, optional
        Diagonal loading of the observed block; ``None`` for the default.

    Attributes
    ----------
    prior_ : PriorStatistics
    model_ : JointGaussian
    n_members_ : int
    """

    def __init__(self, layout="tuesday", jitter=None):
        self.layout = layout
        self.jitter = jitter

    def fit(self, X, y=None):
        layout = get_layout(self.layout)
        X = check_array(X, ensure_min_samples=2)
        ens = WeeklyEnsemble(X, layout)
        self.layout_ = layout
        self.prior_ = ensemble_covariance(ens)
        self.model_ = JointGaussian(self.prior_, self.jitter)
        self.n_members_ = ens.n_members
        self.n_features_in_ = X.shape[1]
        return self

    def fit_history(self, history: HourlyTimeseries, target_week_index: int, ensemble_size: int | None = None):
        """Fit on the weeks preceding ``target_week_index`` of an hourly series."""
        layout = get_layout(self.layout)
        n = ensemble_size or default_ensemble_size(layout)
        cfg = EgprConfig(layout, n, self.jitter)
        return self.fit(build_ensemble(history, target_week_index, cfg).realizations)

    def predict(self, X, return_std=False):
        check_is_fitted(self, "model_")
        X = np.asarray(X, dtype=float)
        single = X.ndim == 1
        X = check_array(np.atleast_2d(X))
        if X.shape[1] != self.layout_.n_obs:
            raise DataError(f"expected {self.layout_.n_obs} observed hours per row, got {X.shape[1]}")
        means = np.array([condition(self.model_, row).mean for row in X])
        std = np.sqrt(np.clip(np.diag(self.model_.posterior_covariance), 0.0, None))
        if single:
            means = means[0]
        if return_std:
            return means, np.broadcast_to(std, means.shape).copy()
        return means

    def posterior_covariance(self):
        check_is_fitted(self, "model_")
        return np.array(self.model_.posterior_covariance)
