"""Side-by-side RMSE comparison of PR, gradient boosting and bagging"""

import enum
import json
import logging
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from ..exceptions import ModelError
from ..learners import (
    ILL_CONDITIONED,
    RECOMMENDED_RIDGE,
    BagConfig,
    BoostConfig,
    FeatureMap,
    LinearModel,
    Regressor,
    check_jensen_bound,
    fit_bagging,
    fit_branch_ensembles,
    fit_branch_models,
    fit_gradient_boosting,
    fit_ols,
    model_from_dict,
)
from ..learners.linear_model import BranchFeatures
from ..network.case import NetworkCase
from ..sampling import Dataset, LabelFamily, SamplerConfig, generate, split
from .metrics import rmse

logger = logging.getLogger(__name__)

REPORT_COLUMNS = ["case", "method", "family", "split", "rmse", "rmse_x1e5"]

# RMSEs are also reported in units of 1e-5 p.u.
RMSE_SCALE = 1e5


class Method(str, enum.Enum):
    PR = "PR"
    GB = "GB"
    BAGGING = "Bagging"

    @classmethod
    def parse(cls, name: str) -> "Method":
        aliases = {
            "pr": cls.PR,
            "gb": cls.GB,
            "bag": cls.BAGGING,
            "bagging": cls.BAGGING,
        }
        try:
            return aliases[name.lower()]
        except KeyError:
            raise ValueError(f"unknown method '{name}'") from None


@dataclass(frozen=True)
class ModelSet:
    """Fitted models of one method: joint bus model and per-branch models

    The bus model maps all 2n voltage features to [P_1..P_n, Q_1..Q_n];
    branch model k maps its endpoint voltages to (P_k, Q_k).
    """

    method: Method
    bus: Regressor
    branches: Tuple[Regressor, ...]

    def predict_family(self, features: np.ndarray, family: LabelFamily) -> np.ndarray:
        family = LabelFamily(family)
        if family.is_branch:
            column = 0 if family is LabelFamily.BRANCH_P else 1
            return np.column_stack(
                [m.predict_features(features)[:, column] for m in self.branches]
            )
        bus = self.bus.predict_features(features)
        n_bus = bus.shape[1] // 2
        return bus[:, :n_bus] if family is LabelFamily.BUS_P else bus[:, n_bus:]

    def collapsed(self) -> Tuple[LinearModel, List[LinearModel]]:
        """Affine forms of the bus model and every branch model"""
        return self.bus.collapse(), [m.collapse() for m in self.branches]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "method": self.method.value,
            "bus": self.bus.to_dict(),
            "branches": [m.to_dict() for m in self.branches],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ModelSet":
        return cls(
            method=Method(data["method"]),
            bus=model_from_dict(data["bus"]),
            branches=tuple(model_from_dict(m) for m in data["branches"]),
        )


def save_models(models: ModelSet, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.write_text(json.dumps(models.to_dict()))
    return path


def load_models(path: Union[str, Path]) -> ModelSet:
    """Read a model set written by ``save_models``

    Raises:
        FileNotFoundError: if the file does not exist
        ModelError: if the file does not hold a model set
    """
    path = Path(path)
    try:
        data = json.loads(path.read_text())
        return ModelSet.from_dict(data)
    except (KeyError, TypeError, ValueError) as e:
        raise ModelError(f"{path} does not hold a fitted model set: {e}") from e


def bus_targets(ds: Dataset) -> np.ndarray:
    return np.hstack([ds.labels_bus_p, ds.labels_bus_q])


def fit_models(
    method: Union[Method, str],
    train: Dataset,
    case: NetworkCase,
    boost_cfg: BoostConfig = BoostConfig(),
    bag_cfg: BagConfig = BagConfig(),
    pr_ridge: float = 0.0,
    jobs: int = 1,
    branch_features: BranchFeatures = "endpoints",
) -> ModelSet:
    """Fit the bus model and all branch models of one method on ``train``"""
    method = Method(method)
    y_bus = bus_targets(train)
    if method is Method.PR:
        pr_bus = fit_ols(train.features, y_bus, pr_ridge, FeatureMap.all_buses())
        if pr_ridge == 0 and pr_bus.condition > ILL_CONDITIONED:
            logger.warning(
                "bus design is ill-conditioned (condition %.2e); consider --ridge %g",
                pr_bus.condition,
                RECOMMENDED_RIDGE,
            )
        bus: Regressor = pr_bus
        branches: List[Regressor] = list(
            fit_branch_models(train, case, pr_ridge, branch_features)
        )
    elif method is Method.GB:
        bus = fit_gradient_boosting(
            train.features, y_bus, boost_cfg, FeatureMap.all_buses()
        )
        branches = list(
            fit_branch_ensembles(
                train,
                case,
                lambda x, y, fm: fit_gradient_boosting(x, y, boost_cfg, fm),
                branch_features,
            )
        )
    else:
        bus = fit_bagging(
            train.features, y_bus, bag_cfg, FeatureMap.all_buses(), jobs=jobs
        )
        branches = list(
            fit_branch_ensembles(
                train,
                case,
                lambda x, y, fm: fit_bagging(x, y, bag_cfg, fm, jobs=jobs),
                branch_features,
            )
        )
    logger.info(
        "fitted %s on %d samples (%d branch models)",
        method.value,
        train.n_samples,
        len(branches),
    )
    return ModelSet(method=method, bus=bus, branches=tuple(branches))


def check_bagging_bounds(models: ModelSet, ds: Dataset) -> None:
    """Averaging bound on ``ds`` for the bus model and every branch model"""
    check_jensen_bound(models.bus, ds.features, bus_targets(ds))
    for k, model in enumerate(models.branches):
        targets = np.column_stack([ds.labels_branch_p[:, k], ds.labels_branch_q[:, k]])
        check_jensen_bound(model, ds.features, targets)


@dataclass(frozen=True)
class RmseEntry:
    case: str
    method: Method
    family: LabelFamily
    split: str
    rmse: float

    @property
    def rmse_x1e5(self) -> float:
        return self.rmse * RMSE_SCALE


@dataclass(frozen=True)
class RmseReport:
    """Average RMSE per case, method, label family and split"""

    entries: Tuple[RmseEntry, ...]

    def __post_init__(self) -> None:
        for entry in self.entries:
            if not (np.isfinite(entry.rmse) and entry.rmse >= 0):
                raise ModelError(f"invalid RMSE {entry.rmse} in report")

    def get(
        self,
        method: Union[Method, str],
        family: Union[LabelFamily, str],
        split: str = "test",
        case: Optional[str] = None,
    ) -> float:
        for entry in self.entries:
            if (
                entry.method is Method(method)
                and entry.family is LabelFamily(family)
                and entry.split == split
                and (case is None or entry.case == case)
            ):
                return entry.rmse
        raise KeyError(f"no entry for {method}/{family}/{split}")

    def to_frame(self) -> pd.DataFrame:
        rows = [
            {
                "case": e.case,
                "method": e.method.value,
                "family": e.family.value,
                "split": e.split,
                "rmse": e.rmse,
                "rmse_x1e5": e.rmse_x1e5,
            }
            for e in self.entries
        ]
        return pd.DataFrame(rows, columns=REPORT_COLUMNS)

    def to_csv(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        self.to_frame().to_csv(path, index=False, float_format="%.17g")
        return path

    @classmethod
    def from_frame(cls, frame: pd.DataFrame) -> "RmseReport":
        return cls(
            tuple(
                RmseEntry(
                    case=str(row.case),
                    method=Method(row.method),
                    family=LabelFamily(row.family),
                    split=str(row.split),
                    rmse=float(row.rmse),
                )
                for row in frame.itertuples(index=False)
            )
        )

    @classmethod
    def from_csv(cls, path: Union[str, Path]) -> "RmseReport":
        return cls.from_frame(pd.read_csv(path, float_precision="round_trip"))


def evaluate_models(
    models: ModelSet, case_name: str, train: Dataset, test: Dataset
) -> List[RmseEntry]:
    entries = []
    for family in LabelFamily:
        for split_name, ds in (("test", test), ("train", train)):
            prediction = models.predict_family(ds.features, family)
            value = rmse(prediction, ds.labels(family))
            entries.append(
                RmseEntry(case_name, models.method, family, split_name, value)
            )
    return entries


def compare_methods(
    case: NetworkCase,
    sampler_cfg: SamplerConfig,
    boost_cfg: BoostConfig = BoostConfig(),
    bag_cfg: BagConfig = BagConfig(),
    pr_ridge: float = 0.0,
    jobs: int = 1,
    branch_features: BranchFeatures = "endpoints",
    dataset: Optional[Dataset] = None,
) -> RmseReport:
    """Generate (or reuse) data, split it, fit PR/GB/Bagging and report RMSEs

    The averaging bound of the bagged models is checked on the test split.
    """
    if dataset is None:
        dataset = generate(case, sampler_cfg, jobs=jobs)
    train, test = split(dataset, sampler_cfg)

    entries: List[RmseEntry] = []
    for method in Method:
        models = fit_models(
            method, train, case, boost_cfg, bag_cfg, pr_ridge, jobs, branch_features
        )
        if method is Method.BAGGING:
            check_bagging_bounds(models, test)
        entries.extend(evaluate_models(models, case.name, train, test))
    return RmseReport(tuple(entries))


@dataclass(frozen=True)
class SeedComparison:
    """Reports of the same comparison repeated over several seeds"""

    seeds: Tuple[int, ...]
    reports: Tuple[RmseReport, ...]

    def long_frame(self) -> pd.DataFrame:
        frames = []
        for seed, report in zip(self.seeds, self.reports):
            frame = report.to_frame()
            frame.insert(0, "seed", seed)
            frames.append(frame)
        return pd.concat(frames, ignore_index=True)

    def median_frame(self) -> pd.DataFrame:
        grouped = self.long_frame().groupby(
            ["case", "method", "family", "split"], sort=False
        )
        medians = grouped["rmse"].median().reset_index()
        medians = medians.rename(columns={"rmse": "median_rmse"})
        medians["median_rmse_x1e5"] = medians["median_rmse"] * RMSE_SCALE
        medians["n_seeds"] = len(self.seeds)
        return medians

    def to_frame(self) -> pd.DataFrame:
        """First seed's report with the median-over-seeds columns appended"""
        return self.reports[0].to_frame().merge(
            self.median_frame(), on=["case", "method", "family", "split"], how="left"
        )

    def to_csv(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        self.to_frame().to_csv(path, index=False, float_format="%.17g")
        return path

    def ordering(self, split: str = "test") -> Dict[str, bool]:
        """Per family: does the median RMSE satisfy GB < Bagging < PR"""
        medians = self.median_frame()
        medians = medians[medians["split"] == split]
        result = {}
        for family in LabelFamily:
            rows = medians[medians["family"] == family.value].set_index("method")
            gb = rows.loc[Method.GB.value, "median_rmse"]
            bag = rows.loc[Method.BAGGING.value, "median_rmse"]
            pr = rows.loc[Method.PR.value, "median_rmse"]
            result[family.value] = bool(gb < bag < pr)
        return result


def compare_methods_over_seeds(
    case: NetworkCase,
    seeds: Sequence[int],
    sampler_cfg: SamplerConfig,
    boost_cfg: BoostConfig = BoostConfig(),
    bag_cfg: BagConfig = BagConfig(),
    pr_ridge: float = 0.0,
    jobs: int = 1,
    branch_features: BranchFeatures = "endpoints",
) -> SeedComparison:
    """``compare_methods`` once per seed; seeds run as independent jobs"""
    if not seeds:
        raise ValueError("at least one seed is required")
    reports = Parallel(n_jobs=jobs)(
        delayed(compare_methods)(
            case,
            replace(sampler_cfg, seed=seed),
            boost_cfg,
            replace(bag_cfg, seed=seed),
            pr_ridge,
            1,
            branch_features,
        )
        for seed in seeds
    )
    comparison = SeedComparison(tuple(seeds), tuple(reports))
    logger.info(
        "%s over %d seeds: median ordering GB < Bagging < PR %s",
        case.name,
        len(seeds),
        comparison.ordering(),
    )
    return comparison
