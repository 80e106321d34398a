"""Ensemble prior statistics and covariance diagnostics.

Weekly realizations are stacked as rows of an ``(N, W)`` matrix whose
columns are the observed hours followed by the forecast hours of a
:class:`~weekahead.timeseries.WindowLayout`. Means are plain column
averages; covariances use the unbiased ``N - 1`` divisor.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .exceptions import DataError, NumericalError
from .timeseries import WindowLayout, get_layout

SYMMETRY_RTOL = 1e-12
EIG_CLAMP_RTOL = 1e-9


@dataclass(frozen=True)
class WeeklyEnsemble:
    """``N`` weekly realizations restricted to a layout's hours, obs first."""

    realizations: np.ndarray
    layout: WindowLayout

    def __post_init__(self):
        layout = get_layout(self.layout)
        X = np.array(self.realizations, dtype=float)
        if X.ndim != 2:
            raise DataError(f"ensemble must be 2-d, got shape {X.shape}")
        if X.shape[0] < 2:
            raise DataError(f"ensemble needs at least 2 members, got {X.shape[0]}")
        if X.shape[1] != layout.width:
            raise DataError(f"ensemble width {X.shape[1]} does not match layout width {layout.width}")
        if not np.all(np.isfinite(X)):
            raise DataError("ensemble contains non-finite entries")
        X.setflags(write=False)
        object.__setattr__(self, "realizations", X)
        object.__setattr__(self, "layout", layout)

    @property
    def n_members(self) -> int:
        return self.realizations.shape[0]

    @property
    def obs(self) -> np.ndarray:
        return self.realizations[:, : self.layout.n_obs]

    @property
    def fcst(self) -> np.ndarray:
        return self.realizations[:, self.layout.n_obs :]


@dataclass(frozen=True)
class PriorStatistics:
    """Prior means and covariance blocks of a joint Gaussian over (obs, fcst)."""

    mean_obs: np.ndarray
    mean_fcst: np.ndarray
    K_oo: np.ndarray
    K_of: np.ndarray
    K_ff: np.ndarray

    def __post_init__(self):
        arrays = {}
        for name in ("mean_obs", "mean_fcst", "K_oo", "K_of", "K_ff"):
            a = np.array(getattr(self, name), dtype=float)
            a.setflags(write=False)
            arrays[name] = a
            object.__setattr__(self, name, a)
        n_o, n_f = arrays["mean_obs"].size, arrays["mean_fcst"].size
        expected = {"K_oo": (n_o, n_o), "K_of": (n_o, n_f), "K_ff": (n_f, n_f)}
        for name, shape in expected.items():
            if arrays[name].shape != shape:
                raise DataError(f"{name} has shape {arrays[name].shape}, expected {shape}")

    @property
    def n_obs(self) -> int:
        return self.mean_obs.size

    @property
    def n_fcst(self) -> int:
        return self.mean_fcst.size

    def joint_mean(self) -> np.ndarray:
        return np.concatenate([self.mean_obs, self.mean_fcst])

    def joint_covariance(self) -> np.ndarray:
        return np.block([[self.K_oo, self.K_of], [self.K_of.T, self.K_ff]])

    @classmethod
    def from_joint(cls, mean, cov, n_obs: int) -> "PriorStatistics":
        """Split a joint mean/covariance with the first ``n_obs`` entries observed."""
        mean = np.asarray(mean, dtype=float)
        cov = np.asarray(cov, dtype=float)
        o = slice(0, n_obs)
        f = slice(n_obs, mean.size)
        return cls(mean[o], mean[f], cov[o, o], cov[o, f], cov[f, f])


def _column_mean(X: np.ndarray) -> np.ndarray:
    # shifted by the first row: exact for identical rows and less prone to
    # cancellation when the spread is small next to the level
    return X[0] + (X - X[0]).mean(axis=0)


def ensemble_mean(ens: WeeklyEnsemble) -> tuple[np.ndarray, np.ndarray]:
    """Column means of the ensemble, split into (obs, fcst) blocks."""
    mean = _column_mean(ens.realizations)
    n_obs = ens.layout.n_obs
    return mean[:n_obs], mean[n_obs:]


def ensemble_covariance(ens: WeeklyEnsemble) -> PriorStatistics:
    """Unbiased ensemble estimates of the prior means and the three covariance blocks."""
    mean_obs, mean_fcst = ensemble_mean(ens)
    dev_obs = ens.obs - mean_obs
    dev_fcst = ens.fcst - mean_fcst
    scale = 1.0 / (ens.n_members - 1)
    K_oo = scale * (dev_obs.T @ dev_obs)
    K_ff = scale * (dev_fcst.T @ dev_fcst)
    K_of = scale * (dev_obs.T @ dev_fcst)
    # matmul of X.T @ X is not guaranteed bitwise symmetric
    K_oo = 0.5 * (K_oo + K_oo.T)
    K_ff = 0.5 * (K_ff + K_ff.T)
    return PriorStatistics(mean_obs, mean_fcst, K_oo, K_of, K_ff)


def sample_covariance(X) -> np.ndarray:
    """Unbiased covariance of the columns of an ``(N, W)`` matrix."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] < 2:
        raise DataError(f"need an (N, W) matrix with N >= 2, got shape {X.shape}")
    dev = X - _column_mean(X)
    C = dev.T @ dev / (X.shape[0] - 1)
    return 0.5 * (C + C.T)


def is_symmetric(C, rtol: float = SYMMETRY_RTOL) -> bool:
    C = np.asarray(C, dtype=float)
    if C.ndim != 2 or C.shape[0] != C.shape[1]:
        return False
    scale = np.max(np.abs(C)) if C.size else 0.0
    return bool(np.max(np.abs(C - C.T), initial=0.0) <= rtol * scale)


def eigenspectrum(C, rtol: float = 1e-10) -> np.ndarray:
    """Eigenvalues of a symmetric matrix in descending order.

    Negative eigenvalues no larger in magnitude than ``1e-9 * trace`` are
    round-off and clamped to zero; larger negative values are returned as is.
    """
    C = np.asarray(C, dtype=float)
    if C.ndim != 2 or C.shape[0] != C.shape[1]:
        raise DataError(f"eigenspectrum needs a square matrix, got shape {C.shape}")
    if not is_symmetric(C, rtol):
        raise DataError("matrix is not symmetric within tolerance")
    C = 0.5 * (C + C.T)
    try:
        eigs = linalg.eigvalsh(C)[::-1].copy()
    except linalg.LinAlgError as exc:
        raise NumericalError(f"symmetric eigensolver failed: {exc}") from exc
    threshold = EIG_CLAMP_RTOL * abs(np.trace(C))
    eigs[(eigs < 0) & (eigs >= -threshold)] = 0.0
    return eigs


def effective_rank(eigs, rtol: float = EIG_CLAMP_RTOL) -> int:
    """Number of eigenvalues above ``rtol`` times their sum."""
    eigs = np.asarray(eigs, dtype=float)
    return int(np.count_nonzero(eigs > rtol * eigs.sum()))


def spectral_energy(eigs, k: int) -> float:
    """Fraction of the total spectrum carried by the ``k`` largest eigenvalues."""
    eigs = np.asarray(eigs, dtype=float)
    if k < 1:
        raise DataError("k must be at least 1")
    total = eigs.sum()
    if total == 0:
        return 1.0
    return float(min(1.0, eigs[:k].sum() / total))


def export_covariance(C, path: str | os.PathLike) -> None:
    """Write a dense matrix as header-less row-major CSV."""
    C = np.atleast_2d(np.asarray(C, dtype=float))
    if not str(path):
        raise DataError("empty output path")
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            for row in C:
                writer.writerow([_fmt(x) for x in row])
    except OSError as exc:
        raise DataError(f"cannot write {path}: {exc}") from exc


def _fmt(x: float) -> str:
    # integral values are written without a decimal point ("1,0")
    return str(int(x)) if x.is_integer() and abs(x) < 2**53 else repr(float(x))


def read_matrix(path: str | os.PathLike) -> np.ndarray:
    if not os.path.isfile(path):
        raise DataError(f"no such file: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [row for row in csv.reader(fh) if row]
    try:
        M = np.array([[float(x) for x in row] for row in rows], dtype=float)
    except ValueError as exc:
        raise DataError(f"{path}: {exc}") from exc
    if M.ndim != 2:
        raise DataError(f"{path} is not a rectangular matrix")
    return M
