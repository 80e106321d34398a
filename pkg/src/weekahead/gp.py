"""Gaussian conditioning, the SE-family kernel and marginal-likelihood fitting.

All solves go through a cached Cholesky factor of the observed-block
covariance; nothing is inverted explicitly.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg, optimize
from scipy.linalg import lapack

from .exceptions import DataError, NumericalError
from .stats import PriorStatistics
from .timeseries import WindowLayout

logger = logging.getLogger(__name__)

LOG_2PI = np.log(2.0 * np.pi)

DEFAULT_JITTER_SCALE = 1e-8
MAX_JITTER_DOUBLINGS = 6

KERNEL_FORMS = ("printed", "squared")


def cholesky(A, jitter: float = 0.0, max_doublings: int = 0) -> tuple[np.ndarray, float]:
    """Lower Cholesky factor of ``A + jitter * I``.

    On failure the jitter is doubled up to ``max_doublings`` times. Returns
    the factor and the jitter that was finally used. Raises
    :class:`NumericalError` carrying the 1-based index of the first leading
    minor that is not positive definite.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DataError(f"cannot factor a matrix of shape {A.shape}")
    eye = np.eye(A.shape[0])
    for attempt in range(max_doublings + 1):
        L, info = lapack.dpotrf(A + jitter * eye, lower=1, clean=1)
        if info == 0:
            return L, jitter
        if info < 0:
            raise NumericalError(f"dpotrf: illegal argument {-info}")
        if attempt < max_doublings and jitter > 0:
            logger.debug("cholesky failed at minor %d with jitter %g, doubling", info, jitter)
            jitter *= 2.0
        else:
            break
    raise NumericalError(
        f"matrix is not positive definite: leading minor {info} fails (jitter {jitter:g})",
        minor=int(info),
    )


def default_jitter(K) -> float:
    """``1e-8`` times the mean diagonal of ``K``."""
    K = np.asarray(K, dtype=float)
    n = K.shape[0]
    scale = np.trace(K) / n if n else 0.0
    if scale <= 0.0:
        # an all-zero block: with a PSD joint the cross block is zero too,
        # so any positive jitter gives the exact (prior) answer
        return 1.0
    return DEFAULT_JITTER_SCALE * scale


@dataclass(frozen=True)
class SEKernelParams:
    """Amplitude ``sigma`` (data units) and correlation time ``gamma`` (hours)."""

    sigma: float
    gamma: float

    def __post_init__(self):
        if not (self.sigma > 0 and np.isfinite(self.sigma)):
            raise DataError(f"sigma must be positive, got {self.sigma}")
        if not (self.gamma > 0 and np.isfinite(self.gamma)):
            raise DataError(f"gamma must be positive, got {self.gamma}")


def se_kernel_matrix(t1, t2, p: SEKernelParams, form: str = "printed") -> np.ndarray:
    """Covariance ``sigma**2 * exp(-lag / (2 * gamma**2))`` between two time grids.

    With ``form="printed"`` the lag is ``|t1 - t2|`` (an exponential,
    Ornstein-Uhlenbeck type kernel). ``form="squared"`` uses ``(t1 - t2)**2``,
    the conventional squared-exponential.
    """
    t1 = np.atleast_1d(np.asarray(t1, dtype=float))
    t2 = np.atleast_1d(np.asarray(t2, dtype=float))
    if t1.size == 0 or t2.size == 0:
        raise DataError("kernel grids must be non-empty")
    diff = np.abs(t1[:, None] - t2[None, :])
    if form == "printed":
        lag = diff
    elif form == "squared":
        lag = diff * diff
    else:
        raise DataError(f"unknown kernel form {form!r}; expected one of {KERNEL_FORMS}")
    return p.sigma**2 * np.exp(-lag / (2.0 * p.gamma**2))


@dataclass(frozen=True)
class ForecastResult:
    """Posterior mean, covariance and standard deviation on the forecast grid."""

    mean: np.ndarray
    covariance: np.ndarray
    std: np.ndarray
    prior_mean: np.ndarray
    layout: WindowLayout | None = None
    hours: np.ndarray | None = None

    def band(self, width: float = 2.0) -> tuple[np.ndarray, np.ndarray]:
        return self.mean - width * self.std, self.mean + width * self.std


@dataclass(frozen=True)
class JointGaussian:
    """A joint normal prior over (observed, forecast) with a cached factorization.

    Parameters
    ----------
    prior : PriorStatistics
    jitter : float, optional
        Added to the diagonal of ``K_oo`` before factoring. Defaults to
        ``1e-8 * trace(K_oo) / n_obs``; doubled up to ``max_doublings`` times
        if the factorization fails.
    """

    prior: PriorStatistics
    jitter: float | None = None
    max_doublings: int = MAX_JITTER_DOUBLINGS
    chol: np.ndarray = field(init=False, repr=False)
    posterior_covariance: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        jitter = default_jitter(self.prior.K_oo) if self.jitter is None else float(self.jitter)
        if jitter < 0:
            raise DataError(f"jitter must be non-negative, got {jitter}")
        L, used = cholesky(self.prior.K_oo, jitter, self.max_doublings)
        object.__setattr__(self, "jitter", used)
        object.__setattr__(self, "chol", L)
        # the posterior covariance does not depend on the observed values
        V = linalg.solve_triangular(L, self.prior.K_of, lower=True, check_finite=False)
        cov = self.prior.K_ff - V.T @ V
        cov = 0.5 * (cov + cov.T)
        cov.setflags(write=False)
        object.__setattr__(self, "posterior_covariance", cov)

    def solve(self, b) -> np.ndarray:
        """``(K_oo + jitter I)^{-1} b`` via the cached factor."""
        return linalg.cho_solve((self.chol, True), b, check_finite=False)


def condition(model: JointGaussian, obs, layout: WindowLayout | None = None, hours=None) -> ForecastResult:
    """Condition the joint prior on observed values of the first block."""
    obs = np.asarray(obs, dtype=float)
    prior = model.prior
    if obs.shape != (prior.n_obs,):
        raise DataError(f"expected {prior.n_obs} observations, got shape {obs.shape}")
    innovation = obs - prior.mean_obs
    mean = prior.mean_fcst + prior.K_of.T @ model.solve(innovation)
    cov = model.posterior_covariance
    std = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    return ForecastResult(mean, cov, std, prior.mean_fcst, layout, hours)


def log_marginal_likelihood(obs, mean, K, jitter: float = 0.0) -> float:
    """Gaussian log density of ``obs`` under ``N(mean, K + jitter I)``."""
    obs = np.asarray(obs, dtype=float)
    mean = np.broadcast_to(np.asarray(mean, dtype=float), obs.shape)
    K = np.asarray(K, dtype=float)
    n = obs.size
    if K.shape != (n, n):
        raise DataError(f"covariance shape {K.shape} does not match {n} observations")
    L, _ = cholesky(K, jitter)
    alpha = linalg.solve_triangular(L, obs - mean, lower=True, check_finite=False)
    return float(-0.5 * alpha @ alpha - np.log(np.diag(L)).sum() - 0.5 * n * LOG_2PI)


@dataclass(frozen=True)
class SEFit:
    """Outcome of :func:`fit_se_hyperparameters`."""

    params: SEKernelParams
    const_mean: float
    log_likelihood: float
    grid_log_likelihood: float
    degenerate: bool = False
    form: str = "printed"

    def __iter__(self):
        # unpacks as (params, const_mean)
        return iter((self.params, self.const_mean))


SIGMA_RANGE = (0.01, 10.0)
GAMMA_RANGE = (1.0, 336.0)
GRID_POINTS = 15
NM_OPTIONS = {"maxiter": 500, "xatol": 1e-6, "fatol": 1e-6, "adaptive": False}


def _se_lml(y, t, sigma, gamma, mean, form, rel_jitter):
    K = se_kernel_matrix(t, t, SEKernelParams(sigma, gamma), form)
    try:
        return log_marginal_likelihood(y, mean, K, rel_jitter * sigma**2)
    except NumericalError:
        return -np.inf


def fit_se_hyperparameters(train, grid, form: str = "printed", rel_jitter: float = 1e-10) -> SEFit:
    """Maximum marginal likelihood estimate of ``(sigma, gamma, constant mean)``.

    A log-spaced grid over ``sigma in [0.01, 10] * sd`` and ``gamma in [1, 336]``
    hours (mean fixed at the sample mean) seeds a Nelder-Mead search over
    ``(log sigma, log gamma, mean)``.
    """
    y = np.asarray(train, dtype=float)
    t = np.asarray(grid, dtype=float)
    if y.ndim != 1 or y.shape != t.shape:
        raise DataError(f"training values and grid must be 1-d of equal length, got {y.shape}, {t.shape}")
    if y.size < 8:
        raise DataError(f"need at least 8 training points, got {y.size}")
    if form not in KERNEL_FORMS:
        raise DataError(f"unknown kernel form {form!r}")
    ybar = float(y.mean())
    sd = float(y.std(ddof=1))
    if not sd > 0:
        logger.warning("constant training data; returning degenerate SE fit")
        sigma = max(SIGMA_RANGE[0] * sd, 1e-8 * max(abs(ybar), 1.0))
        return SEFit(SEKernelParams(sigma, GAMMA_RANGE[0]), ybar, np.nan, np.nan, True, form)

    sigmas = np.geomspace(SIGMA_RANGE[0] * sd, SIGMA_RANGE[1] * sd, GRID_POINTS)
    gammas = np.geomspace(*GAMMA_RANGE, GRID_POINTS)
    best = (-np.inf, sigmas[0], gammas[0])
    for s in sigmas:
        for g in gammas:
            ll = _se_lml(y, t, s, g, ybar, form, rel_jitter)
            if ll > best[0]:
                best = (ll, s, g)
    grid_ll, s0, g0 = best

    def objective(x):
        ll = _se_lml(y, t, np.exp(x[0]), np.exp(x[1]), ybar + sd * x[2], form, rel_jitter)
        return -ll if np.isfinite(ll) else np.inf

    x0 = np.array([np.log(s0), np.log(g0), 0.0])
    res = optimize.minimize(objective, x0, method="Nelder-Mead", options=NM_OPTIONS)
    x, ll = res.x, -res.fun
    if not (np.isfinite(ll) and ll >= grid_ll):
        x, ll = x0, grid_ll
    params = SEKernelParams(float(np.exp(x[0])), float(np.exp(x[1])))
    return SEFit(params, float(ybar + sd * x[2]), float(ll), float(grid_ll), False, form)
