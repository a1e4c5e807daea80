"""Ensembles of linear base learners and their affine collapse"""

import enum
import json
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..exceptions import ModelError
from ..network.case import NetworkCase
from ..sampling.dataset import Dataset
from .linear_model import BranchFeatures, FeatureMap, LinearModel, fit_per_branch


class EnsembleKind(str, enum.Enum):
    BOOSTED = "boosted"
    BAGGED = "bagged"


@dataclass(frozen=True, eq=False)
class EnsembleModel:
    """Boosted: base_constant + sum_t step_t * stage_t(x); Bagged: mean of members

    ``training_mse`` holds the boosting training loss after 0..T stages and
    ``line_search_steps`` the exact squared-loss step of each stage.
    """

    kind: EnsembleKind
    feature_map: FeatureMap
    base_constant: np.ndarray
    stages: Tuple[LinearModel, ...] = ()
    step_sizes: Tuple[float, ...] = ()
    members: Tuple[LinearModel, ...] = ()
    training_mse: Tuple[float, ...] = ()
    line_search_steps: Tuple[float, ...] = ()
    n_inputs: Optional[int] = None

    def __post_init__(self) -> None:
        boosted = self.kind is EnsembleKind.BOOSTED
        if boosted and len(self.stages) != len(self.step_sizes):
            raise ModelError("every boosting stage needs a step size")
        if self.kind is EnsembleKind.BAGGED and not self.members:
            raise ModelError("a bagged ensemble needs at least one member")
        if self.n_inputs is None:
            learners = self.stages or self.members
            if learners:
                object.__setattr__(self, "n_inputs", learners[0].n_inputs)

    @property
    def n_outputs(self) -> int:
        return self.base_constant.shape[0]

    @property
    def size(self) -> int:
        """Number of stages (boosting) or members (bagging)"""
        if self.kind is EnsembleKind.BOOSTED:
            return len(self.stages)
        return len(self.members)

    def predict(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.kind is EnsembleKind.BOOSTED:
            out = np.broadcast_to(
                self.base_constant, x.shape[:-1] + self.base_constant.shape
            ).copy()
            for stage, step in zip(self.stages, self.step_sizes):
                out += step * stage.predict(x)
            return out
        return np.mean([member.predict(x) for member in self.members], axis=0)

    def predict_features(self, features: np.ndarray) -> np.ndarray:
        return self.predict(self.feature_map.apply(np.asarray(features, dtype=float)))

    def staged_predict_features(
        self, features: np.ndarray, sizes: Sequence[int]
    ) -> Dict[int, np.ndarray]:
        """Predictions of every prefix ensemble in ``sizes``, in one pass

        Equal to ``truncate(n).predict_features(features)`` for each ``n``.
        """
        x = self.feature_map.apply(np.asarray(features, dtype=float))
        wanted = set(sizes)
        lowest = 0 if self.kind is EnsembleKind.BOOSTED else 1
        if wanted and (min(wanted) < lowest or max(wanted) > self.size):
            raise ValueError(f"prefix sizes must lie in [{lowest}, {self.size}]")
        snapshots: Dict[int, np.ndarray] = {}
        if self.kind is EnsembleKind.BOOSTED:
            running = np.broadcast_to(
                self.base_constant, x.shape[:-1] + self.base_constant.shape
            ).copy()
            if 0 in wanted:
                snapshots[0] = running.copy()
            for t, (stage, step) in enumerate(zip(self.stages, self.step_sizes), 1):
                running += step * stage.predict(x)
                if t in wanted:
                    snapshots[t] = running.copy()
            return snapshots
        total = None
        for b, member in enumerate(self.members, 1):
            prediction = member.predict(x)
            total = prediction if total is None else total + prediction
            if b in wanted:
                snapshots[b] = total / b
        return snapshots

    def member_predictions(self, features: np.ndarray) -> List[np.ndarray]:
        """Each bagged member's own prediction"""
        x = self.feature_map.apply(np.asarray(features, dtype=float))
        return [member.predict(x) for member in self.members]

    def truncate(self, size: int) -> "EnsembleModel":
        """The ensemble made of the first ``size`` stages or members"""
        if self.kind is EnsembleKind.BOOSTED:
            if not 0 <= size <= len(self.stages):
                raise ValueError(f"cannot truncate {len(self.stages)} stages to {size}")
            return EnsembleModel(
                kind=self.kind,
                feature_map=self.feature_map,
                base_constant=self.base_constant,
                stages=self.stages[:size],
                step_sizes=self.step_sizes[:size],
                training_mse=self.training_mse[: size + 1],
                line_search_steps=self.line_search_steps[:size],
                n_inputs=self.n_inputs,
            )
        if not 1 <= size <= len(self.members):
            raise ValueError(f"cannot truncate {len(self.members)} members to {size}")
        members = self.members[:size]
        return EnsembleModel(
            kind=self.kind,
            feature_map=self.feature_map,
            base_constant=np.mean([m.intercept for m in members], axis=0),
            members=members,
        )

    def collapse(self) -> LinearModel:
        """The single affine map equal to this ensemble"""
        if self.kind is EnsembleKind.BOOSTED:
            if self.n_inputs is None:
                raise ModelError("input dimension unknown for an empty ensemble")
            coeffs = np.zeros((self.n_outputs, self.n_inputs))
            intercept = self.base_constant.astype(float).copy()
            for stage, step in zip(self.stages, self.step_sizes):
                affine = stage.collapse()
                coeffs = coeffs + step * affine.coeffs
                intercept = intercept + step * affine.intercept
        else:
            affine_members = [m.collapse() for m in self.members]
            coeffs = np.mean([m.coeffs for m in affine_members], axis=0)
            intercept = np.mean([m.intercept for m in affine_members], axis=0)
        return LinearModel(
            coeffs=coeffs, intercept=intercept, feature_map=self.feature_map
        )

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "type": "ensemble",
            "kind": self.kind.value,
            "feature_map": self.feature_map.to_dict(),
            "base_constant": self.base_constant.tolist(),
            "stages": [s.to_dict() for s in self.stages],
            "step_sizes": list(self.step_sizes),
            "members": [m.to_dict() for m in self.members],
            "training_mse": list(self.training_mse),
            "line_search_steps": list(self.line_search_steps),
            "n_inputs": self.n_inputs,
        }
        try:
            data["collapsed"] = self.collapse().to_dict()
        except ModelError:
            data["collapsed"] = None
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "EnsembleModel":
        return cls(
            kind=EnsembleKind(data["kind"]),
            feature_map=FeatureMap.from_dict(data["feature_map"]),
            base_constant=np.array(data["base_constant"], dtype=float),
            stages=tuple(LinearModel.from_dict(s) for s in data["stages"]),
            step_sizes=tuple(float(t) for t in data["step_sizes"]),
            members=tuple(LinearModel.from_dict(m) for m in data["members"]),
            training_mse=tuple(float(v) for v in data.get("training_mse", ())),
            line_search_steps=tuple(
                float(v) for v in data.get("line_search_steps", ())
            ),
            n_inputs=data.get("n_inputs"),
        )


Regressor = Union[LinearModel, EnsembleModel]


def predict_ensemble(model: EnsembleModel, x: np.ndarray) -> np.ndarray:
    return model.predict(x)


def model_from_dict(data: Dict[str, Any]) -> Regressor:
    if data.get("type") == "ensemble":
        return EnsembleModel.from_dict(data)
    return LinearModel.from_dict(data)


def dumps_model(model: Regressor) -> str:
    return json.dumps(model.to_dict())


def loads_model(text: str) -> Regressor:
    return model_from_dict(json.loads(text))


def fit_branch_ensembles(
    ds: Dataset,
    case: NetworkCase,
    fit: Callable[[np.ndarray, np.ndarray, FeatureMap], EnsembleModel],
    branch_features: BranchFeatures = "endpoints",
) -> List[EnsembleModel]:
    """One (P_ij, Q_ij) ensemble per branch, each built by ``fit(x, y, feature_map)``"""
    if ds.n_bus != case.n_bus or ds.labels_branch_p.shape[1] != case.n_branch:
        raise ModelError("dataset columns do not align with the case topology")
    return fit_per_branch(
        ds.features,
        ds.labels_branch_p,
        ds.labels_branch_q,
        [(br.from_bus, br.to_bus) for br in case.branches],
        fit,
        branch_features,
    )
