"""RMSE metrics, method comparison and tuning sweeps"""

from .comparison import (
    RMSE_SCALE,
    Method,
    ModelSet,
    RmseEntry,
    RmseReport,
    SeedComparison,
    check_bagging_bounds,
    compare_methods,
    compare_methods_over_seeds,
    fit_models,
    load_models,
    save_models,
)
from .metrics import per_output_rmse, rmse
from .plotting import plot_comparison, plot_sweep
from .sweeps import SweepCurve, SweepParameter, sweep_bagging, sweep_boosting

__all__ = [
    "Method",
    "ModelSet",
    "RMSE_SCALE",
    "RmseEntry",
    "RmseReport",
    "SeedComparison",
    "SweepCurve",
    "SweepParameter",
    "check_bagging_bounds",
    "compare_methods",
    "compare_methods_over_seeds",
    "fit_models",
    "load_models",
    "per_output_rmse",
    "plot_comparison",
    "plot_sweep",
    "rmse",
    "save_models",
    "sweep_bagging",
    "sweep_boosting",
]
