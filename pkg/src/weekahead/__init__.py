"""Week-ahead load and generation forecasting with ensemble Gaussian process regression."""

from .baselines import ARIForecaster, SEKernelRegressor
from .egpr import EgprConfig, EnsembleGPRegressor, forecast, forecast_report
from .exceptions import DataError, InsufficientHistoryError, NumericalError, WeekaheadError
from .gp import ForecastResult, JointGaussian, SEKernelParams, condition
from .stats import PriorStatistics, WeeklyEnsemble, ensemble_covariance, eigenspectrum
from .synth import SynthConfig, generate_dispatch, generate_load
from .timeseries import MONDAY_LAYOUT, TUESDAY_LAYOUT, HourlyTimeseries, WindowLayout

__version__ = "0.1.0"

__all__ = [
    "ARIForecaster",
    "DataError",
    "EgprConfig",
    "EnsembleGPRegressor",
    "ForecastResult",
    "HourlyTimeseries",
    "InsufficientHistoryError",
    "JointGaussian",
    "MONDAY_LAYOUT",
    "NumericalError",
    "PriorStatistics",
    "SEKernelParams",
    "SEKernelRegressor",
    "SynthConfig",
    "TUESDAY_LAYOUT",
    "WeekaheadError",
    "WeeklyEnsemble",
    "WindowLayout",
    "condition",
    "eigenspectrum",
    "ensemble_covariance",
    "forecast",
    "forecast_report",
    "generate_dispatch",
    "generate_load",
]
