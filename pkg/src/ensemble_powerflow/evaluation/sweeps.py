"""Tuning sweeps over the number of boosting stages T and bootstraps BT"""

import enum
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union, cast

import numpy as np
import pandas as pd

from ..learners import BagConfig, BoostConfig, EnsembleModel
from ..learners.linear_model import BranchFeatures
from ..network.case import NetworkCase
from ..sampling import Dataset, LabelFamily, SamplerConfig, generate, split
from .comparison import Method, ModelSet, check_bagging_bounds, fit_models
from .metrics import rmse

logger = logging.getLogger(__name__)

SWEEP_COLUMNS = ["case", "param", "value", "family", "split", "rmse"]

SeriesKey = Tuple[str, str]


class SweepParameter(str, enum.Enum):
    T = "T"
    BT = "BT"


@dataclass(frozen=True)
class SweepCurve:
    """Test and train RMSE per label family at every grid point

    ``series[(family, split)][i]`` belongs to ``grid[i]``. Bagging sweeps also
    carry each member's own RMSE in ``member_scatter``.
    """

    case: str
    parameter: SweepParameter
    grid: Tuple[int, ...]
    series: Dict[SeriesKey, Tuple[float, ...]]
    member_scatter: Dict[SeriesKey, Tuple[float, ...]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        validate_grid(self.grid, 0 if self.parameter is SweepParameter.T else 1)
        for key, values in self.series.items():
            if len(values) != len(self.grid):
                raise ValueError(f"series {key} does not match the grid length")

    def values(
        self, family: Union[LabelFamily, str], split: str = "test"
    ) -> np.ndarray:
        return np.array(self.series[(LabelFamily(family).value, split)])

    def to_frame(self) -> pd.DataFrame:
        rows = [
            {
                "case": self.case,
                "param": self.parameter.value,
                "value": value,
                "family": family,
                "split": split_name,
                "rmse": series[i],
            }
            for (family, split_name), series in self.series.items()
            for i, value in enumerate(self.grid)
        ]
        return pd.DataFrame(rows, columns=SWEEP_COLUMNS)

    def member_frame(self) -> pd.DataFrame:
        rows = [
            {
                "case": self.case,
                "param": "member",
                "value": i + 1,
                "family": family,
                "split": split_name,
                "rmse": value,
            }
            for (family, split_name), scatter in self.member_scatter.items()
            for i, value in enumerate(scatter)
        ]
        return pd.DataFrame(rows, columns=SWEEP_COLUMNS)

    def to_csv(self, path: Union[str, Path]) -> List[Path]:
        """Write the curve, plus ``<stem>_members.csv`` when members were scored"""
        path = Path(path)
        self.to_frame().to_csv(path, index=False, float_format="%.17g")
        written = [path]
        if self.member_scatter:
            members_path = path.with_name(f"{path.stem}_members{path.suffix}")
            self.member_frame().to_csv(members_path, index=False, float_format="%.17g")
            written.append(members_path)
        return written


def validate_grid(grid: Sequence[int], lowest: int) -> None:
    if not grid:
        raise ValueError("sweep grid must not be empty")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError(f"sweep grid must be strictly increasing, got {list(grid)}")
    if grid[0] < lowest:
        raise ValueError(f"sweep grid values must be at least {lowest}")


def _family_rmse(
    bus: np.ndarray, branches: List[np.ndarray], ds: Dataset, family: LabelFamily
) -> float:
    n_bus = ds.n_bus
    if family is LabelFamily.BUS_P:
        prediction = bus[:, :n_bus]
    elif family is LabelFamily.BUS_Q:
        prediction = bus[:, n_bus:]
    else:
        column = 0 if family is LabelFamily.BRANCH_P else 1
        prediction = np.column_stack([b[:, column] for b in branches])
    return rmse(prediction, ds.labels(family))


def _staged_series(
    bus_model: EnsembleModel,
    branch_models: Sequence[EnsembleModel],
    grid: Sequence[int],
    splits: Dict[str, Dataset],
) -> Dict[SeriesKey, Tuple[float, ...]]:
    series: Dict[SeriesKey, Tuple[float, ...]] = {}
    for split_name, ds in splits.items():
        bus = bus_model.staged_predict_features(ds.features, grid)
        branches = [m.staged_predict_features(ds.features, grid) for m in branch_models]
        for family in LabelFamily:
            series[(family.value, split_name)] = tuple(
                _family_rmse(bus[n], [b[n] for b in branches], ds, family) for n in grid
            )
    return series


def _ensembles(models: ModelSet) -> Tuple[EnsembleModel, List[EnsembleModel]]:
    return (
        cast(EnsembleModel, models.bus),
        [cast(EnsembleModel, m) for m in models.branches],
    )


def _prepare(
    case: NetworkCase,
    sampler_cfg: SamplerConfig,
    dataset: Optional[Dataset],
    jobs: int,
) -> Dict[str, Dataset]:
    if dataset is None:
        dataset = generate(case, sampler_cfg, jobs=jobs)
    train, test = split(dataset, sampler_cfg)
    return {"test": test, "train": train}


def sweep_boosting(
    case: NetworkCase,
    grid: Sequence[int],
    sampler_cfg: SamplerConfig,
    boost_cfg: BoostConfig = BoostConfig(),
    dataset: Optional[Dataset] = None,
    jobs: int = 1,
    branch_features: BranchFeatures = "endpoints",
) -> SweepCurve:
    """RMSE against T from a single run of ``max(grid)`` stages

    Stage t does not depend on the total stage count, so the prefix of length
    T is exactly the ensemble a T-stage run would fit.
    """
    grid = tuple(int(t) for t in grid)
    validate_grid(grid, 0)
    splits = _prepare(case, sampler_cfg, dataset, jobs)
    models = fit_models(
        Method.GB,
        splits["train"],
        case,
        boost_cfg=replace(boost_cfg, n_learners=grid[-1]),
        jobs=jobs,
        branch_features=branch_features,
    )
    bus, branches = _ensembles(models)
    series = _staged_series(bus, branches, grid, splits)
    logger.info("boosting sweep on %s over T=%s", case.name, list(grid))
    return SweepCurve(case.name, SweepParameter.T, grid, series)


def sweep_bagging(
    case: NetworkCase,
    grid: Sequence[int],
    sampler_cfg: SamplerConfig,
    bag_cfg: BagConfig = BagConfig(),
    dataset: Optional[Dataset] = None,
    jobs: int = 1,
    branch_features: BranchFeatures = "endpoints",
) -> SweepCurve:
    """RMSE against BT over nested prefixes of one member list

    Member b is the same model at every grid point that includes it.
    """
    grid = tuple(int(b) for b in grid)
    validate_grid(grid, 1)
    splits = _prepare(case, sampler_cfg, dataset, jobs)
    models = fit_models(
        Method.BAGGING,
        splits["train"],
        case,
        bag_cfg=replace(bag_cfg, n_bootstraps=grid[-1]),
        jobs=jobs,
        branch_features=branch_features,
    )
    check_bagging_bounds(models, splits["test"])
    bus, branches = _ensembles(models)
    series = _staged_series(bus, branches, grid, splits)

    scatter: Dict[SeriesKey, Tuple[float, ...]] = {}
    for split_name, ds in splits.items():
        bus_members = bus.member_predictions(ds.features)
        branch_members = [m.member_predictions(ds.features) for m in branches]
        for family in LabelFamily:
            scatter[(family.value, split_name)] = tuple(
                _family_rmse(bus_members[b], [m[b] for m in branch_members], ds, family)
                for b in range(grid[-1])
            )
    logger.info("bagging sweep on %s over BT=%s", case.name, list(grid))
    return SweepCurve(case.name, SweepParameter.BT, grid, series, scatter)
