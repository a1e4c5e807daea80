"""Gradient boosting with linear least-squares stages.

For the squared loss the negative gradient of the training loss at the
current model is the residual matrix, so every stage is an OLS fit to the
residuals left by the previous stages. All outputs share the stages.
"""

import enum
import logging
from dataclasses import dataclass

import numpy as np

from ..exceptions import EnsembleInvariantError, ModelError
from .ensemble import EnsembleKind, EnsembleModel
from .linear_model import DesignFactorization, FeatureMap

logger = logging.getLogger(__name__)

# A stage whose fit is this small relative to the residual adds nothing
FIXED_POINT_RATIO = 1e-10
LINE_SEARCH_TOLERANCE = 1e-9
DESCENT_TOLERANCE = 1e-9


class StepRule(str, enum.Enum):
    CONSTANT = "constant"
    LINE_SEARCH = "line_search"


@dataclass(frozen=True)
class BoostConfig:
    n_learners: int = 200
    learning_rate_mode: StepRule = StepRule.CONSTANT
    theta: float = 0.1
    ridge_lambda: float = 0.0
    degree: int = 1

    def __post_init__(self) -> None:
        if self.n_learners < 0:
            raise ValueError(
                f"n_learners must be non-negative, got {self.n_learners}"
            )
        rule = StepRule(self.learning_rate_mode)
        object.__setattr__(self, "learning_rate_mode", rule)
        if self.learning_rate_mode is StepRule.CONSTANT and not 0 < self.theta < 2:
            raise ValueError(f"theta must lie in (0, 2), got {self.theta}")
        if self.ridge_lambda < 0:
            raise ValueError(
                f"ridge_lambda must be non-negative, got {self.ridge_lambda}"
            )
        if self.degree < 1:
            raise ValueError(f"degree must be at least 1, got {self.degree}")


def _mse(residual: np.ndarray) -> float:
    return float(np.mean(residual * residual)) if residual.size else 0.0


def exact_step(residual: np.ndarray, fitted: np.ndarray) -> float:
    """Step minimizing ||residual - step * fitted||^2; 1 when the fit vanishes"""
    fitted_sq = float(np.sum(fitted * fitted))
    if fitted_sq <= (FIXED_POINT_RATIO**2) * float(np.sum(residual * residual)):
        return 1.0
    return float(np.sum(residual * fitted)) / fitted_sq


def fit_gradient_boosting(
    x: np.ndarray,
    y: np.ndarray,
    cfg: BoostConfig = BoostConfig(),
    feature_map: FeatureMap = FeatureMap(),
) -> EnsembleModel:
    """Boosted ensemble: mean initialization then ``cfg.n_learners`` residual fits

    Raises:
        ModelError: invalid regression inputs
        EnsembleInvariantError: the training loss increased between stages
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if y.ndim != 2 or y.shape[0] < 1:
        raise ModelError("Y must be a non-empty 2-D array")

    factorization = DesignFactorization(x, cfg.degree)
    if factorization.n_rows != y.shape[0]:
        raise ModelError(f"X has {factorization.n_rows} rows but Y has {y.shape[0]}")

    base_constant = y.mean(axis=0)
    residual = y - base_constant
    history = [_mse(residual)]
    stages = []
    steps = []
    exact_steps = []

    for t in range(cfg.n_learners):
        stage = factorization.fit(residual, cfg.ridge_lambda, feature_map)
        fitted = stage.predict(x)

        optimal = exact_step(residual, fitted)
        exact_steps.append(optimal)
        if cfg.learning_rate_mode is StepRule.LINE_SEARCH:
            step = optimal
        else:
            step = cfg.theta
        residual = residual - step * fitted
        mse = _mse(residual)
        if mse > history[-1] * (1 + DESCENT_TOLERANCE) + 1e-12 * history[0]:
            raise EnsembleInvariantError(
                f"training loss increased at stage {t + 1}: "
                f"{history[-1]:.6e} -> {mse:.6e}"
            )
        history.append(mse)
        stages.append(stage)
        steps.append(step)

    deviation = max((abs(s - 1.0) for s in exact_steps), default=0.0)
    if cfg.ridge_lambda == 0 and deviation > LINE_SEARCH_TOLERANCE:
        logger.warning(
            "exact line search deviates from 1 by up to %.3e; stage fits are not "
            "least-squares projections",
            deviation,
        )
    logger.debug(
        "boosting: %d stages, training MSE %.3e -> %.3e",
        cfg.n_learners,
        history[0],
        history[-1],
    )
    return EnsembleModel(
        kind=EnsembleKind.BOOSTED,
        feature_map=feature_map,
        base_constant=base_constant,
        stages=tuple(stages),
        step_sizes=tuple(steps),
        training_mse=tuple(history),
        line_search_steps=tuple(exact_steps),
        n_inputs=x.shape[1],
    )
