"""Linear base learner and its boosted and bagged ensembles"""

from .bagging import BagConfig, bootstrap_rows, check_jensen_bound, fit_bagging
from .boosting import BoostConfig, StepRule, fit_gradient_boosting
from .ensemble import (
    EnsembleKind,
    EnsembleModel,
    Regressor,
    dumps_model,
    fit_branch_ensembles,
    loads_model,
    model_from_dict,
    predict_ensemble,
)
from .linear_model import (
    ILL_CONDITIONED,
    RECOMMENDED_RIDGE,
    DesignFactorization,
    FeatureMap,
    FeatureMapKind,
    LinearModel,
    fit_branch_models,
    fit_ols,
    polynomial_features,
    predict,
)

__all__ = [
    "BagConfig",
    "BoostConfig",
    "DesignFactorization",
    "EnsembleKind",
    "EnsembleModel",
    "FeatureMap",
    "FeatureMapKind",
    "ILL_CONDITIONED",
    "LinearModel",
    "RECOMMENDED_RIDGE",
    "Regressor",
    "StepRule",
    "bootstrap_rows",
    "check_jensen_bound",
    "dumps_model",
    "fit_bagging",
    "fit_branch_ensembles",
    "fit_branch_models",
    "fit_gradient_boosting",
    "fit_ols",
    "loads_model",
    "model_from_dict",
    "polynomial_features",
    "predict",
    "predict_ensemble",
]
