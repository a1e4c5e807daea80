"""Monte Carlo load sampling and dataset generation"""

import logging
import math
from dataclasses import dataclass
from typing import Any, Optional, Tuple

import numpy as np
from joblib import Parallel, delayed

from .. import seeding
from ..exceptions import DataGenerationError, PowerFlowError
from ..network.admittance import build_admittance, build_branch_matrices
from ..network.case import NetworkCase
from ..powerflow.flows import compute_flows
from ..powerflow.newton import DEFAULT_MAX_ITER, DEFAULT_TOL, newton_raphson
from .dataset import Dataset, DatasetMeta

logger = logging.getLogger(__name__)

# Sample sizes used for the IEEE cases in the published comparison
PUBLISHED_SAMPLE_SIZES = {"case5": 175, "case57": 250, "case118": 400}

# Empirical minimum: samples per bus
MIN_SAMPLES_PER_BUS = 2.4

MAX_ATTEMPTS_PER_SAMPLE = 50


@dataclass(frozen=True)
class SamplerConfig:
    n_samples: int
    load_scale_min: float = 0.6
    load_scale_max: float = 1.1
    seed: int = 7
    per_load_independent: bool = True
    split_fraction: float = 0.5
    max_failure_fraction: float = 0.2
    tol: float = DEFAULT_TOL
    max_iter: int = DEFAULT_MAX_ITER

    def __post_init__(self) -> None:
        if self.n_samples < 1:
            raise ValueError(f"n_samples must be positive, got {self.n_samples}")
        if not 0 < self.load_scale_min <= self.load_scale_max:
            raise ValueError(
                "load scale bounds must satisfy 0 < load_scale_min <= load_scale_max"
            )
        if not 0 < self.split_fraction < 1:
            raise ValueError(
                f"split_fraction must lie in (0, 1), got {self.split_fraction}"
            )
        if self.seed < 0:
            raise ValueError(f"seed must be non-negative, got {self.seed}")

    @classmethod
    def for_case(cls, case: NetworkCase, **overrides: Any) -> "SamplerConfig":
        """Config with the published sample size for the case (or 2.4 n)"""
        default = PUBLISHED_SAMPLE_SIZES.get(case.name, minimum_samples(case))
        overrides.setdefault("n_samples", default)
        return cls(**overrides)


def minimum_samples(case: NetworkCase) -> int:
    return math.ceil(MIN_SAMPLES_PER_BUS * case.n_bus)


def _draw_sample(
    case: NetworkCase, cfg: SamplerConfig, ybus: Any, branch_matrices: Any, index: int
) -> Tuple[np.ndarray, Any, np.ndarray, int]:
    """Draw load factors until the power flow converges; one substream per sample"""
    rng = seeding.substream(cfg.seed, seeding.SAMPLES, index)
    base_p, base_q = case.p_load, case.q_load
    failures = 0
    while True:
        if cfg.per_load_independent:
            scale = rng.uniform(cfg.load_scale_min, cfg.load_scale_max, case.n_bus)
        else:
            scale = np.full(
                case.n_bus, rng.uniform(cfg.load_scale_min, cfg.load_scale_max)
            )
        scaled = case.with_loads(base_p * scale, base_q * scale)
        try:
            result = newton_raphson(
                scaled, tol=cfg.tol, max_iter=cfg.max_iter, ybus=ybus
            )
        except PowerFlowError as e:
            failures += 1
            logger.debug("sample %d draw failed: %s", index, e)
            if failures >= MAX_ATTEMPTS_PER_SAMPLE:
                raise DataGenerationError(
                    f"sample {index}: {failures} consecutive draws failed to converge"
                ) from e
            continue
        flows = compute_flows(scaled, result.state, ybus, branch_matrices)
        return result.state.as_features(), flows, scale, failures


def generate(
    case: NetworkCase, cfg: SamplerConfig, jobs: int = 1
) -> Dataset:
    """Monte Carlo dataset: scale loads, solve AC power flow, record voltages and flows

    Non-convergent draws are redrawn and counted. Results do not depend on
    ``jobs``.

    Raises:
        DataGenerationError: more than ``cfg.max_failure_fraction`` of draws failed
    """
    if cfg.n_samples < minimum_samples(case):
        logger.warning(
            "%d samples is below the recommended minimum of %d for %d buses",
            cfg.n_samples,
            minimum_samples(case),
            case.n_bus,
        )
    ybus = build_admittance(case)
    branch_matrices = build_branch_matrices(case)

    samples = Parallel(n_jobs=jobs)(
        delayed(_draw_sample)(case, cfg, ybus, branch_matrices, index)
        for index in range(cfg.n_samples)
    )

    failed = sum(s[3] for s in samples)
    total_draws = failed + cfg.n_samples
    if failed > cfg.max_failure_fraction * total_draws:
        raise DataGenerationError(
            f"{failed} of {total_draws} draws failed to converge; "
            "the load range does not suit this case"
        )

    dataset = Dataset(
        features=np.vstack([s[0] for s in samples]),
        labels_bus_p=np.vstack([s[1].p_inj for s in samples]),
        labels_bus_q=np.vstack([s[1].q_inj for s in samples]),
        labels_branch_p=np.vstack([s[1].p_flow for s in samples]),
        labels_branch_q=np.vstack([s[1].q_flow for s in samples]),
        load_scale=np.vstack([s[2] for s in samples]),
        meta=DatasetMeta(
            case_name=case.name,
            seed=cfg.seed,
            n_samples=cfg.n_samples,
            failed_samples=failed,
        ),
    )
    logger.info(
        "generated %d samples for %s (%d failed draws)",
        dataset.n_samples,
        case.name,
        failed,
    )
    return dataset


def split(
    ds: Dataset, cfg: SamplerConfig, fraction: Optional[float] = None
) -> Tuple[Dataset, Dataset]:
    """Seeded shuffle then partition; the training part gets ceil(fraction * M) rows"""
    fraction = cfg.split_fraction if fraction is None else fraction
    if not 0 < fraction < 1:
        raise ValueError(f"split fraction must lie in (0, 1), got {fraction}")
    if ds.n_samples < 2:
        raise ValueError(f"cannot split a dataset of {ds.n_samples} rows")
    order = seeding.substream(cfg.seed, seeding.SPLIT).permutation(ds.n_samples)
    n_train = min(max(math.ceil(fraction * ds.n_samples), 1), ds.n_samples - 1)
    return ds.take(order[:n_train]), ds.take(order[n_train:])
