"""Bootstrap aggregation of linear least-squares members"""

import logging
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np
from joblib import Parallel, delayed

from .. import seeding
from ..exceptions import EnsembleInvariantError, ModelError
from .ensemble import EnsembleKind, EnsembleModel
from .linear_model import RECOMMENDED_RIDGE, FeatureMap, LinearModel, fit_ols

logger = logging.getLogger(__name__)

JENSEN_TOLERANCE = 1e-12

# (generator, rows available, rows to draw) -> row indices
Resampler = Callable[[np.random.Generator, int, int], np.ndarray]


def bootstrap_rows(rng: np.random.Generator, n_rows: int, size: int) -> np.ndarray:
    """Uniform draw of ``size`` row indices with replacement"""
    return rng.integers(0, n_rows, size=size)


@dataclass(frozen=True)
class BagConfig:
    n_bootstraps: int = 50
    sample_size: Optional[int] = None
    seed: int = 7
    ridge_lambda: float = 0.0
    degree: int = 1

    def __post_init__(self) -> None:
        if self.n_bootstraps < 1:
            raise ValueError(
                f"n_bootstraps must be at least 1, got {self.n_bootstraps}"
            )
        if self.sample_size is not None and self.sample_size < 1:
            raise ValueError(f"sample_size must be at least 1, got {self.sample_size}")
        if self.seed < 0:
            raise ValueError(f"seed must be non-negative, got {self.seed}")
        if self.ridge_lambda < 0:
            raise ValueError(
                f"ridge_lambda must be non-negative, got {self.ridge_lambda}"
            )


def _fit_member(
    x: np.ndarray,
    y: np.ndarray,
    cfg: BagConfig,
    feature_map: FeatureMap,
    size: int,
    index: int,
    resample: Resampler,
) -> LinearModel:
    rng = seeding.substream(cfg.seed, seeding.BOOTSTRAP, index)
    rows = np.asarray(resample(rng, x.shape[0], size), dtype=int)
    xb = x[rows]
    ridge_lambda = cfg.ridge_lambda
    if ridge_lambda == 0 and np.unique(xb, axis=0).shape[0] < 2:
        logger.warning(
            "bootstrap %d has fewer than two distinct rows; fitting with ridge %g",
            index,
            RECOMMENDED_RIDGE,
        )
        ridge_lambda = RECOMMENDED_RIDGE
    return fit_ols(
        xb, y[rows], ridge_lambda, feature_map=feature_map, degree=cfg.degree
    )


def fit_bagging(
    x: np.ndarray,
    y: np.ndarray,
    cfg: BagConfig = BagConfig(),
    feature_map: FeatureMap = FeatureMap(),
    jobs: int = 1,
    resample: Resampler = bootstrap_rows,
) -> EnsembleModel:
    """Bagged ensemble of ``cfg.n_bootstraps`` OLS members

    Member ``b`` draws its rows from its own seed substream, so the ensemble
    does not depend on ``jobs``.

    Raises:
        ModelError: invalid regression inputs or ``sample_size`` above M
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 2 or y.ndim != 2 or x.shape[0] != y.shape[0]:
        raise ModelError("X and Y must be 2-D with the same number of rows")
    if x.shape[0] < 1:
        raise ModelError("cannot fit on an empty design")
    size = x.shape[0] if cfg.sample_size is None else cfg.sample_size
    if size > x.shape[0]:
        raise ModelError(f"sample_size {size} exceeds the {x.shape[0]} training rows")

    members = Parallel(n_jobs=jobs)(
        delayed(_fit_member)(x, y, cfg, feature_map, size, b, resample)
        for b in range(cfg.n_bootstraps)
    )
    logger.debug("bagging: %d members of %d rows", len(members), size)
    return EnsembleModel(
        kind=EnsembleKind.BAGGED,
        feature_map=feature_map,
        base_constant=np.mean([m.intercept for m in members], axis=0),
        members=tuple(members),
        n_inputs=x.shape[1],
    )


def check_jensen_bound(
    model: EnsembleModel, features: np.ndarray, y: np.ndarray
) -> Tuple[float, float]:
    """Squared loss of the bagged predictor and the mean member loss

    ``features`` are full rows; the model's feature map selects its inputs.

    Raises:
        EnsembleInvariantError: the averaged predictor lost to its average member
    """
    if model.kind is not EnsembleKind.BAGGED:
        raise ModelError("the averaging bound applies to bagged ensembles only")
    y = np.asarray(y, dtype=float)
    bagged = float(np.mean((model.predict_features(features) - y) ** 2))
    member_mean = float(
        np.mean(
            [np.mean((p - y) ** 2) for p in model.member_predictions(features)]
        )
    )
    if bagged > member_mean * (1 + JENSEN_TOLERANCE) + np.finfo(float).tiny:
        raise EnsembleInvariantError(
            f"bagged loss {bagged:.6e} exceeds the mean member loss {member_mean:.6e}"
        )
    return bagged, member_mean
