"""Comparison forecasters: GPR with a fitted SE-family kernel, and ARI(p, d).

The ARIMA baseline has no moving-average part (``q = 0``); the AR
coefficients are estimated by conditional least squares on the
differenced series.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from .exceptions import DataError, NumericalError
from .gp import JointGaussian, SEFit, condition, fit_se_hyperparameters, se_kernel_matrix
from .stats import PriorStatistics

logger = logging.getLogger(__name__)

# -- standard GPR --------------------------------------------------------------


def gpr_se_forecast(train, fcst_grid, train_grid=None, form: str = "printed", jitter=None, return_fit: bool = False):
    """Fit ``(sigma, gamma, mean)`` on ``train`` and condition on it at ``fcst_grid``.

    ``train_grid`` defaults to hours ``0 .. len(train) - 1``; ``fcst_grid``
    is on the same clock.
    """
    train = np.asarray(train, dtype=float)
    t_train = np.arange(train.size, dtype=float) if train_grid is None else np.asarray(train_grid, dtype=float)
    t_fcst = np.atleast_1d(np.asarray(fcst_grid, dtype=float))
    fit = fit_se_hyperparameters(train, t_train, form=form)
    p = fit.params
    prior = PriorStatistics(
        np.full(train.size, fit.const_mean),
        np.full(t_fcst.size, fit.const_mean),
        se_kernel_matrix(t_train, t_train, p, form),
        se_kernel_matrix(t_train, t_fcst, p, form),
        se_kernel_matrix(t_fcst, t_fcst, p, form),
    )
    result = condition(JointGaussian(prior, jitter), train, hours=t_fcst)
    return (result, fit) if return_fit else result


class SEKernelRegressor(RegressorMixin, BaseEstimator):
    """Standard GPR on a time axis with a constant mean and an SE-family kernel.

    Hyperparameters are fitted by maximizing the marginal likelihood of the
    training data.

    Parameters
    ----------
    form : {"printed", "squared"}, default="printed"
        ``"printed"`` uses the absolute lag in the exponent, ``"squared"``
        the conventional squared lag.
    jitter : float, optional
    """

    def __init__(self, form="printed", jitter=None):
        self.form = form
        self.jitter = jitter

    def fit(self, X, y):
        t = np.asarray(X, dtype=float).reshape(-1)
        y = np.asarray(y, dtype=float).reshape(-1)
        self.fit_: SEFit = fit_se_hyperparameters(y, t, form=self.form)
        self.kernel_params_ = self.fit_.params
        self.const_mean_ = self.fit_.const_mean
        self.X_train_ = t
        self.y_train_ = y
        return self

    def predict(self, X, return_std=False):
        check_is_fitted(self, "fit_")
        t = np.asarray(X, dtype=float).reshape(-1)
        p = self.kernel_params_
        prior = PriorStatistics(
            np.full(self.y_train_.size, self.const_mean_),
            np.full(t.size, self.const_mean_),
            se_kernel_matrix(self.X_train_, self.X_train_, p, self.form),
            se_kernel_matrix(self.X_train_, t, p, self.form),
            se_kernel_matrix(t, t, p, self.form),
        )
        result = condition(JointGaussian(prior, self.jitter), self.y_train_, hours=t)
        return (result.mean, result.std) if return_std else result.mean


# -- ARIMA ---------------------------------------------------------------------


def difference(x, d: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if d < 0:
        raise DataError("differencing order must be non-negative")
    return np.diff(x, n=d) if d else x.copy()


def integrate(dx, heads) -> np.ndarray:
    """Invert :func:`difference`: ``heads[k]`` is the first value of the ``k``-times differenced series."""
    out = np.asarray(dx, dtype=float)
    for head in reversed(list(heads)):
        out = np.concatenate([[head], head + np.cumsum(out)])
    return out


def difference_heads(x, d: int) -> list[float]:
    x = np.asarray(x, dtype=float)
    return [float(np.diff(x, n=k)[0]) for k in range(d)]


@dataclass(frozen=True)
class ArimaModel:
    p: int
    d: int
    q: int
    ar_coeffs: np.ndarray
    ma_coeffs: np.ndarray
    intercept: float
    residual_variance: float
    n_obs: int = 0
    rank_deficient: bool = False

    def __post_init__(self):
        if min(self.p, self.d, self.q) < 0:
            raise DataError("ARIMA orders must be non-negative")
        if len(self.ar_coeffs) != self.p or len(self.ma_coeffs) != self.q:
            raise DataError("coefficient vectors do not match the model orders")
        object.__setattr__(self, "ar_coeffs", np.asarray(self.ar_coeffs, dtype=float))
        object.__setattr__(self, "ma_coeffs", np.asarray(self.ma_coeffs, dtype=float))


def _lagged_design(x, p, start):
    # rows t = start .. n-1 regress x[t] on [x[t-1], ..., x[t-p]]
    n = x.size
    lags = np.column_stack([x[start - i : n - i] for i in range(1, p + 1)]) if p else np.empty((n - start, 0))
    return lags, x[start:]


def _ls_fit(x, p, start):
    """Least squares with intercept; returns ``(intercept, phi, residuals, rank)``.

    The regression runs on centered columns and takes the minimum-norm
    solution, so lag columns without variation get a zero coefficient.
    """
    lags, b = _lagged_design(x, p, start)
    lag_mean = lags.mean(axis=0) if p else np.empty(0)
    b_mean = b.mean()
    A = lags - lag_mean
    if p:
        phi, _, rank, _ = np.linalg.lstsq(A, b - b_mean, rcond=None)
    else:
        phi, rank = np.empty(0), 0
    intercept = float(b_mean - lag_mean @ phi)
    resid = b - intercept - lags @ phi
    return intercept, phi, resid, int(rank)


def fit_arima(train, p: int, d: int = 1) -> ArimaModel:
    """Conditional least-squares fit of an ARI(p, d) model with intercept.

    The residual variance is ``RSS / (n_eff - p - 1)``, which reduces to the
    ``ddof=1`` sample variance when ``p = 0``. A rank-deficient lag matrix
    is reported through a warning and ``ArimaModel.rank_deficient``; the
    minimum-norm coefficients are kept.
    """
    train = np.asarray(train, dtype=float)
    if p < 0 or d < 0:
        raise DataError("ARIMA orders must be non-negative")
    if train.size <= p + d + 1:
        raise DataError(f"need more than {p + d + 1} training points for ARI({p},{d}), got {train.size}")
    x = difference(train, d)
    intercept, phi, resid, rank = _ls_fit(x, p, p)
    if not np.all(np.isfinite(phi)):
        raise NumericalError(f"AR({p}) least squares produced non-finite coefficients")
    dof = resid.size - (p + 1)
    if dof < 1:
        raise DataError(f"too few points to estimate ARI({p},{d})")
    deficient = rank < p
    if deficient:
        logger.warning("AR(%d) regression matrix is singular (rank %d < %d); using minimum-norm coefficients", p, rank, p)
    return ArimaModel(p, d, 0, phi, np.empty(0), intercept, float(resid @ resid / dof), int(train.size), deficient)


def _expanded_ar(model: ArimaModel) -> np.ndarray:
    # coefficients a_i of x_t = sum a_i x_{t-i} + ... for phi(B) (1 - B)^d
    poly = np.concatenate([[1.0], -model.ar_coeffs])
    for _ in range(model.d):
        poly = np.convolve(poly, [1.0, -1.0])
    return -poly[1:]


def psi_weights(model: ArimaModel, horizon: int) -> np.ndarray:
    a = _expanded_ar(model)
    psi = np.zeros(horizon)
    if horizon:
        psi[0] = 1.0
    for j in range(1, horizon):
        k = min(j, a.size)
        psi[j] = a[:k] @ psi[j - 1 :: -1][:k]
    return psi


def arima_forecast(model: ArimaModel, train_tail, horizon: int) -> tuple[np.ndarray, np.ndarray]:
    """Multi-step mean and standard deviation following the end of ``train_tail``."""
    tail = np.asarray(train_tail, dtype=float)
    p, d = model.p, model.d
    if tail.size < p + d:
        raise DataError(f"need at least {p + d} trailing values, got {tail.size}")
    if horizon < 0:
        raise DataError("horizon must be non-negative")
    if horizon == 0:
        return np.empty(0), np.empty(0)
    x = difference(tail, d)
    hist = list(x[x.size - p :]) if p else []
    phi = model.ar_coeffs
    fdiff = np.empty(horizon)
    for h in range(horizon):
        val = model.intercept
        for i in range(1, p + 1):
            val += phi[i - 1] * hist[-i]
        fdiff[h] = val
        hist.append(val)
    # integrate back from the last value of every differencing level
    mean = fdiff
    for k in reversed(range(d)):
        last = np.diff(tail, n=k)[-1]
        mean = last + np.cumsum(mean)
    psi = psi_weights(model, horizon)
    std = np.sqrt(model.residual_variance * np.cumsum(psi**2))
    return mean, std


def select_order(train, p_max: int, d: int = 1) -> int:
    """AR order in ``1 .. p_max`` with the lowest AIC on a common estimation sample.

    ``AIC = n log(RSS / n) + 2 p`` with ``n = len(diff(train, d)) - p_max`` for
    every candidate, so the criteria are comparable.
    """
    x = difference(train, d)
    if p_max < 1:
        raise DataError("p_max must be at least 1")
    if p_max >= x.size / 3:
        raise DataError(f"p_max={p_max} is too large for {x.size} differenced points")
    best_p, best_aic = 1, np.inf
    for p in range(1, p_max + 1):
        _, _, resid, _ = _ls_fit(x, p, p_max)
        n = resid.size
        rss = resid @ resid
        aic = n * np.log(rss / n) + 2 * p if rss > 0 else -np.inf
        if aic < best_aic:
            best_p, best_aic = p, aic
    return best_p


class ARIForecaster(BaseEstimator):
    """Nonseasonal ARI(p, d) forecaster.

    ``fit(y)`` estimates the model on a training series; ``predict(horizon)``
    continues it. With ``p=None`` the order is chosen by AIC up to ``p_max``.
    """

    def __init__(self, p=None, d=1, p_max=24):
        self.p = p
        self.d = d
        self.p_max = p_max

    def fit(self, y, X=None):
        y = np.asarray(y, dtype=float).reshape(-1)
        if not np.all(np.isfinite(y)):
            raise DataError("training series contains non-finite values")
        p = self.p if self.p is not None else select_order(y, self.p_max, self.d)
        self.model_ = fit_arima(y, p, self.d)
        self.order_ = (p, self.d, 0)
        self.tail_ = y[-(p + self.d + 1) :].copy()
        return self

    def predict(self, horizon, return_std=False):
        check_is_fitted(self, "model_")
        mean, std = arima_forecast(self.model_, self.tail_, int(horizon))
        return (mean, std) if return_std else mean
