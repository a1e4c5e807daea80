"""Prediction error metrics"""

import numpy as np

from ..exceptions import ModelError


def per_output_rmse(pred: np.ndarray, truth: np.ndarray) -> np.ndarray:
    """Root mean square error of each output column"""
    pred = np.asarray(pred, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if pred.shape != truth.shape:
        raise ModelError(f"shape mismatch: {pred.shape} vs {truth.shape}")
    if pred.ndim != 2 or pred.shape[0] < 1:
        raise ModelError("RMSE needs an M x k array with M >= 1")
    return np.sqrt(np.mean((pred - truth) ** 2, axis=0))


def rmse(pred: np.ndarray, truth: np.ndarray) -> float:
    """Average RMSE: per-output RMSE averaged across the k outputs"""
    return float(np.mean(per_output_rmse(pred, truth)))
