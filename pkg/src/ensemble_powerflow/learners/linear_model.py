"""Multi-output affine least squares: the base learner P = A X + b.

The design is centred before factorization so the intercept is never
penalized; one SVD is shared by all outputs:

    Xc = U S V^T
    B  = V diag(s / (s^2 + lambda)) U^T Yc      (lambda > 0)
    B  = V diag(1 / s) U^T Yc, small s dropped  (lambda = 0, minimum norm)
    b  = mean(Y) - mean(X) B
"""

import enum
import itertools
import logging
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Literal, Optional, Sequence

import numpy as np
from scipy import linalg

from ..exceptions import ModelError
from ..network.case import NetworkCase
from ..sampling.dataset import Dataset

logger = logging.getLogger(__name__)

# Singular-value ratio above which the fit is reported as ill-conditioned
ILL_CONDITIONED = 1e12
RECOMMENDED_RIDGE = 1e-8


class FeatureMapKind(str, enum.Enum):
    ALL_BUSES = "all_buses"
    BRANCH_ENDPOINTS = "branch_endpoints"


@dataclass(frozen=True)
class FeatureMap:
    """Which columns of a full rectangular feature row a model reads"""

    kind: FeatureMapKind = FeatureMapKind.ALL_BUSES
    from_bus: Optional[int] = None
    to_bus: Optional[int] = None

    @classmethod
    def all_buses(cls) -> "FeatureMap":
        return cls(FeatureMapKind.ALL_BUSES)

    @classmethod
    def endpoints(cls, from_bus: int, to_bus: int) -> "FeatureMap":
        return cls(FeatureMapKind.BRANCH_ENDPOINTS, from_bus, to_bus)

    def columns(self) -> Optional[np.ndarray]:
        if self.kind is FeatureMapKind.ALL_BUSES:
            return None
        assert self.from_bus is not None and self.to_bus is not None
        i, j = self.from_bus, self.to_bus
        return np.array([2 * i, 2 * i + 1, 2 * j, 2 * j + 1])

    def apply(self, features: np.ndarray) -> np.ndarray:
        """Select model inputs (e_i, f_i, e_j, f_j for endpoints) from full rows"""
        columns = self.columns()
        if columns is None:
            return features
        return features[..., columns]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind.value,
            "from_bus": self.from_bus,
            "to_bus": self.to_bus,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "FeatureMap":
        return cls(
            FeatureMapKind(data["kind"]), data.get("from_bus"), data.get("to_bus")
        )


def polynomial_features(x: np.ndarray, degree: int) -> np.ndarray:
    """Append all monomials of degree 2..degree to the raw inputs"""
    if degree == 1:
        return x
    squeeze = x.ndim == 1
    x2 = np.atleast_2d(x)
    columns = [x2]
    for d in range(2, degree + 1):
        for combo in itertools.combinations_with_replacement(range(x2.shape[1]), d):
            columns.append(np.prod(x2[:, combo], axis=1, keepdims=True))
    out = np.hstack(columns)
    return out[0] if squeeze else out


@dataclass(frozen=True, eq=False)
class LinearModel:
    """k outputs as an affine (degree 1) or polynomial map of d inputs"""

    coeffs: np.ndarray
    intercept: np.ndarray
    feature_map: FeatureMap = FeatureMap()
    ridge_lambda: float = 0.0
    degree: int = 1
    n_inputs: Optional[int] = None
    condition: float = 1.0

    def __post_init__(self) -> None:
        if self.coeffs.ndim != 2 or self.intercept.shape != (self.coeffs.shape[0],):
            raise ModelError("coeffs must be k x d and intercept a k-vector")
        finite = np.isfinite(self.coeffs).all() and np.isfinite(self.intercept).all()
        if not finite:
            raise ModelError("model has non-finite entries")
        if self.n_inputs is None:
            object.__setattr__(self, "n_inputs", self.coeffs.shape[1])

    @property
    def n_outputs(self) -> int:
        return self.coeffs.shape[0]

    def predict(self, x: np.ndarray) -> np.ndarray:
        """A x + b for a d-vector, or row-wise for an M x d matrix"""
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.n_inputs:
            raise ModelError(
                f"dimension mismatch: model expects {self.n_inputs} inputs, "
                f"got {x.shape[-1]}"
            )
        return polynomial_features(x, self.degree) @ self.coeffs.T + self.intercept

    def predict_features(self, features: np.ndarray) -> np.ndarray:
        """Predict from full rectangular feature rows (2n columns)"""
        return self.predict(self.feature_map.apply(np.asarray(features, dtype=float)))

    def collapse(self) -> "LinearModel":
        if self.degree != 1:
            raise ModelError("only degree-1 models have an affine form")
        return self

    def to_dict(self) -> Dict[str, Any]:
        return {
            "type": "linear",
            "coeffs": self.coeffs.tolist(),
            "intercept": self.intercept.tolist(),
            "feature_map": self.feature_map.to_dict(),
            "ridge_lambda": self.ridge_lambda,
            "degree": self.degree,
            "n_inputs": self.n_inputs,
            "condition": self.condition,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "LinearModel":
        return cls(
            coeffs=np.array(data["coeffs"], dtype=float).reshape(
                len(data["intercept"]), -1
            ),
            intercept=np.array(data["intercept"], dtype=float),
            feature_map=FeatureMap.from_dict(data["feature_map"]),
            ridge_lambda=float(data["ridge_lambda"]),
            degree=int(data.get("degree", 1)),
            n_inputs=data.get("n_inputs"),
            condition=float(data.get("condition", 1.0)),
        )


class DesignFactorization:
    """Centred SVD of a design matrix, shared by every fit against that design

    Boosting stages refit the same inputs to new residuals.
    """

    def __init__(self, x: np.ndarray, degree: int = 1) -> None:
        x = np.asarray(x, dtype=float)
        if x.ndim != 2:
            raise ModelError("X must be 2-D")
        if x.shape[0] < 1:
            raise ModelError("cannot fit on an empty design")
        if not np.all(np.isfinite(x)):
            raise ModelError("non-finite values in regression inputs")
        if degree < 1:
            raise ModelError(f"degree must be at least 1, got {degree}")

        self.degree = degree
        self.n_rows, self.n_inputs = x.shape
        design = polynomial_features(x, degree)
        self.x_mean = design.mean(axis=0)
        self.u, self.s, self.vt = linalg.svd(
            design - self.x_mean, full_matrices=False, lapack_driver="gesvd"
        )
        s0 = self.s[0] if self.s.size else 0.0
        cutoff = s0 * max(design.shape) * np.finfo(float).eps
        self.kept = self.s > cutoff
        kept = self.s[self.kept]
        self.condition = float(kept[0] / kept[-1]) if kept.size else 1.0
        self.rank = int(kept.size)

    def fit(
        self,
        y: np.ndarray,
        ridge_lambda: float = 0.0,
        feature_map: FeatureMap = FeatureMap(),
    ) -> LinearModel:
        y = np.asarray(y, dtype=float)
        if y.ndim != 2:
            raise ModelError("Y must be 2-D")
        if y.shape[0] != self.n_rows:
            raise ModelError(f"X has {self.n_rows} rows but Y has {y.shape[0]}")
        if not np.all(np.isfinite(y)):
            raise ModelError("non-finite values in regression inputs")
        if ridge_lambda < 0:
            raise ModelError(f"ridge_lambda must be non-negative, got {ridge_lambda}")

        if ridge_lambda > 0:
            factor = self.s / (self.s * self.s + ridge_lambda)
        else:
            factor = np.zeros_like(self.s)
            factor[self.kept] = 1.0 / self.s[self.kept]

        y_mean = y.mean(axis=0)
        b = self.vt.T @ (factor[:, None] * (self.u.T @ (y - y_mean)))
        return LinearModel(
            coeffs=b.T.copy(),
            intercept=y_mean - self.x_mean @ b,
            feature_map=feature_map,
            ridge_lambda=ridge_lambda,
            degree=self.degree,
            n_inputs=self.n_inputs,
            condition=self.condition,
        )


def fit_ols(
    x: np.ndarray,
    y: np.ndarray,
    ridge_lambda: float = 0.0,
    feature_map: FeatureMap = FeatureMap(),
    degree: int = 1,
) -> LinearModel:
    """Least squares fit of Y ~ A X + b with optional ridge penalty on A

    With ``ridge_lambda == 0`` and a rank-deficient design the minimum-norm
    coefficients are returned.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim == 2 and y.ndim == 2 and x.shape[0] != y.shape[0]:
        raise ModelError(f"X has {x.shape[0]} rows but Y has {y.shape[0]}")
    factorization = DesignFactorization(x, degree)
    if ridge_lambda == 0 and factorization.condition > ILL_CONDITIONED:
        logger.debug("ill-conditioned design (condition %.2e)", factorization.condition)
    return factorization.fit(y, ridge_lambda, feature_map)


def predict(model: LinearModel, x: np.ndarray) -> np.ndarray:
    """A x + b"""
    return model.predict(x)


BranchFeatures = Literal["endpoints", "all_buses"]


def branch_feature_map(
    from_bus: int, to_bus: int, branch_features: BranchFeatures
) -> FeatureMap:
    if branch_features == "endpoints":
        return FeatureMap.endpoints(from_bus, to_bus)
    if branch_features == "all_buses":
        return FeatureMap.all_buses()
    raise ValueError(
        f"branch_features must be 'endpoints' or 'all_buses', got '{branch_features}'"
    )


def fit_per_branch(
    features: np.ndarray,
    branch_p: np.ndarray,
    branch_q: np.ndarray,
    endpoints: Sequence[Sequence[int]],
    fit: Callable[[np.ndarray, np.ndarray, FeatureMap], Any],
    branch_features: BranchFeatures = "endpoints",
) -> List[Any]:
    """One 2-output (P_ij, Q_ij) model per branch, built by ``fit``"""
    models = []
    for k, (i, j) in enumerate(endpoints):
        feature_map = branch_feature_map(i, j, branch_features)
        targets = np.column_stack([branch_p[:, k], branch_q[:, k]])
        models.append(fit(feature_map.apply(features), targets, feature_map))
    return models


def fit_branch_models(
    ds: Dataset,
    case: NetworkCase,
    ridge_lambda: float = 0.0,
    branch_features: BranchFeatures = "endpoints",
) -> List[LinearModel]:
    """Per-branch least squares models on endpoint voltages (e_i, f_i, e_j, f_j)"""
    if ds.n_bus != case.n_bus or ds.labels_branch_p.shape[1] != case.n_branch:
        raise ModelError("dataset columns do not align with the case topology")
    return fit_per_branch(
        ds.features,
        ds.labels_branch_p,
        ds.labels_branch_q,
        [(br.from_bus, br.to_bus) for br in case.branches],
        lambda x, y, fm: fit_ols(x, y, ridge_lambda, feature_map=fm),
        branch_features,
    )

