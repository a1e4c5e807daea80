"""Dataset container and its CSV / binary / JSON persistence"""

import enum
import json
from dataclasses import asdict, dataclass, replace
from pathlib import Path
from typing import Dict, List, Union

import numpy as np
import pandas as pd

_LABEL_FIELDS = ("labels_bus_p", "labels_bus_q", "labels_branch_p", "labels_branch_q")


class LabelFamily(str, enum.Enum):
    BUS_P = "bus_P"
    BUS_Q = "bus_Q"
    BRANCH_P = "branch_P"
    BRANCH_Q = "branch_Q"

    @property
    def is_branch(self) -> bool:
        return self in (LabelFamily.BRANCH_P, LabelFamily.BRANCH_Q)


@dataclass(frozen=True)
class DatasetMeta:
    case_name: str
    seed: int
    n_samples: int
    failed_samples: int = 0


@dataclass(frozen=True, eq=False)
class Dataset:
    """Rectangular voltage features with injection and branch-flow labels

    ``features`` is M x 2n with columns [e_1, f_1, ..., e_n, f_n].
    ``load_scale`` keeps the per-bus load factor of each draw.
    """

    features: np.ndarray
    labels_bus_p: np.ndarray
    labels_bus_q: np.ndarray
    labels_branch_p: np.ndarray
    labels_branch_q: np.ndarray
    load_scale: np.ndarray
    meta: DatasetMeta

    def __post_init__(self) -> None:
        m = self.features.shape[0]
        for name in _LABEL_FIELDS:
            if getattr(self, name).shape[0] != m:
                raise ValueError(f"{name} has a different row count than features")

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def n_bus(self) -> int:
        return self.features.shape[1] // 2

    def labels(self, family: LabelFamily) -> np.ndarray:
        return {
            LabelFamily.BUS_P: self.labels_bus_p,
            LabelFamily.BUS_Q: self.labels_bus_q,
            LabelFamily.BRANCH_P: self.labels_branch_p,
            LabelFamily.BRANCH_Q: self.labels_branch_q,
        }[LabelFamily(family)]

    def take(self, rows: np.ndarray) -> "Dataset":
        """Subset of rows, in the given order"""
        rows = np.asarray(rows, dtype=int)
        return Dataset(
            features=self.features[rows],
            labels_bus_p=self.labels_bus_p[rows],
            labels_bus_q=self.labels_bus_q[rows],
            labels_branch_p=self.labels_branch_p[rows],
            labels_branch_q=self.labels_branch_q[rows],
            load_scale=self.load_scale[rows],
            meta=replace(self.meta, n_samples=len(rows)),
        )


_FILES: Dict[str, str] = {
    "features": "features.csv",
    "labels_bus_p": "labels_bus_p.csv",
    "labels_bus_q": "labels_bus_q.csv",
    "labels_branch_p": "labels_branch_p.csv",
    "labels_branch_q": "labels_branch_q.csv",
    "load_scale": "load_scale.csv",
}


def _columns(name: str, width: int) -> List[str]:
    if name == "features":
        return [f"{part}_{i + 1}" for i in range(width // 2) for part in ("e", "f")]
    bus_sized = name in ("labels_bus_p", "labels_bus_q", "load_scale")
    prefix = "bus" if bus_sized else "branch"
    return [f"{prefix}_{i + 1}" for i in range(width)]


def save_dataset(ds: Dataset, directory: Union[str, Path]) -> List[Path]:
    """Write one CSV per matrix, a ``dataset.npz`` binary and ``meta.json``

    Returns:
        Paths of every written file
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    arrays = {}
    for name, filename in _FILES.items():
        matrix = getattr(ds, name)
        arrays[name] = matrix
        path = directory / filename
        frame = pd.DataFrame(matrix, columns=_columns(name, matrix.shape[1]))
        frame.to_csv(path, index=False, float_format="%.17g")
        written.append(path)

    npz_path = directory / "dataset.npz"
    np.savez_compressed(npz_path, **arrays)
    written.append(npz_path)

    meta_path = directory / "meta.json"
    meta_path.write_text(json.dumps(asdict(ds.meta), indent=2))
    written.append(meta_path)
    return written


def load_dataset(directory: Union[str, Path], binary: bool = True) -> Dataset:
    """Read a dataset written by ``save_dataset`` (binary form by default)"""
    directory = Path(directory)
    meta = DatasetMeta(**json.loads((directory / "meta.json").read_text()))
    if binary:
        with np.load(directory / "dataset.npz") as data:
            arrays = {name: data[name] for name in _FILES}
    else:
        arrays = {
            name: pd.read_csv(
                directory / filename, float_precision="round_trip"
            ).to_numpy(dtype=float)
            for name, filename in _FILES.items()
        }
    return Dataset(meta=meta, **arrays)
