"""Experiment orchestration: datasets, comparisons, sweeps and OPF runs"""

import hashlib
import json
import logging
import time
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple, Union

from . import __version__
from .config.config_manager import ConfigManager
from .evaluation import (
    Method,
    ModelSet,
    RmseReport,
    SeedComparison,
    SweepCurve,
    SweepParameter,
    compare_methods,
    compare_methods_over_seeds,
    fit_models,
    load_models,
    plot_comparison,
    plot_sweep,
    save_models,
    sweep_bagging,
    sweep_boosting,
)
from .exceptions import ModelError
from .learners import BagConfig, BoostConfig
from .learners.linear_model import BranchFeatures
from .network import NetworkCase, load_case
from .opf import (
    OpfSolution,
    SolverOptions,
    build_ddcr,
    diagnose_ddcr,
    gap_report,
    solve_convex,
    solve_dcopf,
    write_gap_report,
)
from .sampling import Dataset, SamplerConfig, generate, save_dataset

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"

DEFAULT_T_GRID = (1, 2, 5, 10, 20, 50, 100, 150, 180, 200)
DEFAULT_BT_GRID = (1, 2, 5, 10, 20, 30, 40, 50)
REPRODUCE_CASES = ("case5", "case57", "case118")
OPF_METHODS = ("gb", "pr", "bag", "dc")

CaseLike = Union[str, Path, NetworkCase]


def file_sha256(path: Union[str, Path]) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


@dataclass
class RunManifest:
    """Record of one run: inputs, configuration, timings and every file written

    Artifact keys are paths relative to ``root``; values are SHA-256 digests.
    """

    command: str
    root: Path
    case: Optional[str] = None
    case_source: Optional[str] = None
    seed: Optional[int] = None
    configs: Dict[str, Any] = field(default_factory=dict)
    version: str = __version__
    artifacts: Dict[str, str] = field(default_factory=dict)
    timings: Dict[str, float] = field(default_factory=dict)

    def add(self, *paths: Union[str, Path]) -> None:
        for path in paths:
            self.artifacts[self._key(Path(path))] = file_sha256(path)

    def _key(self, path: Path) -> str:
        try:
            return path.resolve().relative_to(self.root.resolve()).as_posix()
        except ValueError:
            return str(path)

    @contextmanager
    def stage(self, name: str) -> Iterator[None]:
        """Accumulate the wall-clock time of the enclosed block under ``name``"""
        start = time.perf_counter()
        try:
            yield
        finally:
            elapsed = time.perf_counter() - start
            self.timings[name] = self.timings.get(name, 0.0) + elapsed

    def merge(self, other: "RunManifest", prefix: str) -> None:
        """Take over the artifacts and timings of a nested run"""
        for key, digest in other.artifacts.items():
            self.artifacts[self._key(other.root / key)] = digest
        for name, elapsed in other.timings.items():
            self.timings[f"{prefix}/{name}"] = elapsed

    def verify(self) -> List[str]:
        """Artifacts whose current content no longer matches the recorded digest"""
        return [
            key
            for key, digest in self.artifacts.items()
            if not (self.root / key).is_file()
            or file_sha256(self.root / key) != digest
        ]

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["root"] = str(self.root)
        return data

    def write(self) -> Path:
        self.root.mkdir(parents=True, exist_ok=True)
        path = self.root / MANIFEST_NAME
        path.write_text(json.dumps(self.to_dict(), indent=2, default=str))
        return path

    @classmethod
    def read(cls, path: Union[str, Path]) -> "RunManifest":
        data = json.loads(Path(path).read_text())
        data["root"] = Path(data["root"])
        return cls(**data)


def _ddcr_label(method: Method) -> str:
    return "DDCR" if method is Method.GB else f"DDCR-{method.value}"


class ExperimentRunner:
    """Runs experiments end to end and writes their artifacts under one root"""

    def __init__(
        self,
        config_manager: Optional[ConfigManager] = None,
        output_root: Optional[str] = None,
        jobs: Optional[int] = None,
        seed: Optional[int] = None,
        sampler_overrides: Optional[Dict[str, Any]] = None,
    ):
        """Initialize the runner with its configuration

        Args:
            config_manager: Optional configuration manager. If None, uses default.
            output_root: Artifact directory (overrides ENSEMBLE_PF_OUTPUT_ROOT)
            jobs: Worker count (overrides ENSEMBLE_PF_JOBS)
            seed: Base random seed (overrides ENSEMBLE_PF_SEED)
            sampler_overrides: SamplerConfig fields applied to every case

        Raises:
            ValueError: overrides given together with a config_manager
        """
        self.sampler_overrides = dict(sampler_overrides or {})
        overridden = output_root or jobs is not None or seed is not None
        if overridden and config_manager is not None:
            raise ValueError(
                "pass output_root, jobs and seed to the ConfigManager "
                "when supplying one"
            )
        if overridden:
            self.config = ConfigManager(output_root=output_root, jobs=jobs, seed=seed)
        else:
            self.config = config_manager or ConfigManager()

    def resolve_case(self, case: CaseLike) -> NetworkCase:
        return case if isinstance(case, NetworkCase) else load_case(case)

    def sampler_config(self, case: NetworkCase, **overrides: Any) -> SamplerConfig:
        """Published sample size for the case, seeded from the configuration

        Explicit ``overrides`` win over the runner-wide ``sampler_overrides``.
        """
        merged = {"seed": self.config.seed, **self.sampler_overrides, **overrides}
        return SamplerConfig.for_case(case, **merged)

    def run_dir(
        self, command: str, case_name: str, out: Optional[Union[str, Path]] = None
    ) -> Path:
        directory = (
            Path(out)
            if out is not None
            else self.config.output_root / case_name / command
        )
        directory.mkdir(parents=True, exist_ok=True)
        return directory

    def _manifest(
        self,
        command: str,
        directory: Path,
        case: CaseLike,
        network: NetworkCase,
        cfg: SamplerConfig,
    ) -> RunManifest:
        source = None if isinstance(case, NetworkCase) else str(case)
        return RunManifest(
            command=command,
            root=directory,
            case=network.name,
            case_source=source,
            seed=cfg.seed,
            configs={"sampler": asdict(cfg), "jobs": self.config.jobs},
        )

    def generate(
        self,
        case: CaseLike,
        sampler_cfg: Optional[SamplerConfig] = None,
        out: Optional[Union[str, Path]] = None,
    ) -> Tuple[Dataset, RunManifest]:
        """Monte Carlo dataset for a case, written as CSV, npz and meta.json"""
        network = self.resolve_case(case)
        cfg = sampler_cfg or self.sampler_config(network)
        directory = self.run_dir("generate", network.name, out)
        manifest = self._manifest("generate", directory, case, network, cfg)

        with manifest.stage("generate"):
            dataset = generate(network, cfg, jobs=self.config.jobs)
        with manifest.stage("write"):
            manifest.add(*save_dataset(dataset, directory / "dataset"))
        manifest.write()
        return dataset, manifest

    def compare(
        self,
        case: CaseLike,
        sampler_cfg: Optional[SamplerConfig] = None,
        boost_cfg: BoostConfig = BoostConfig(),
        bag_cfg: Optional[BagConfig] = None,
        pr_ridge: float = 0.0,
        seeds: Optional[Sequence[int]] = None,
        branch_features: BranchFeatures = "endpoints",
        dataset: Optional[Dataset] = None,
        out: Optional[Union[str, Path]] = None,
    ) -> Tuple[Union[RmseReport, SeedComparison], RunManifest]:
        """PR / GB / Bagging RMSE table (CSV and SVG)

        With ``seeds`` the comparison is repeated once per seed and the table
        gains median-over-seeds columns; ``dataset`` is then ignored.
        """
        network = self.resolve_case(case)
        cfg = sampler_cfg or self.sampler_config(network)
        bag_cfg = bag_cfg or BagConfig(seed=cfg.seed)
        directory = self.run_dir("compare", network.name, out)
        manifest = self._manifest("compare", directory, case, network, cfg)
        manifest.configs.update(
            boost=asdict(boost_cfg),
            bag=asdict(bag_cfg),
            pr_ridge=pr_ridge,
            branch_features=branch_features,
            seeds=list(seeds) if seeds else None,
        )

        result: Union[RmseReport, SeedComparison]
        with manifest.stage("compare"):
            if seeds:
                result = compare_methods_over_seeds(
                    network,
                    seeds,
                    cfg,
                    boost_cfg,
                    bag_cfg,
                    pr_ridge,
                    self.config.jobs,
                    branch_features,
                )
                report = result.reports[0]
            else:
                result = report = compare_methods(
                    network,
                    cfg,
                    boost_cfg,
                    bag_cfg,
                    pr_ridge,
                    self.config.jobs,
                    branch_features,
                    dataset,
                )
        with manifest.stage("write"):
            manifest.add(result.to_csv(directory / "rmse_table.csv"))
            if isinstance(result, SeedComparison):
                seeds_path = directory / "rmse_seeds.csv"
                result.long_frame().to_csv(
                    seeds_path, index=False, float_format="%.17g"
                )
                manifest.add(seeds_path)
            manifest.add(plot_comparison(report, directory / "rmse_table.svg"))
        manifest.write()
        return result, manifest

    def sweep(
        self,
        case: CaseLike,
        parameters: Sequence[Union[SweepParameter, str]] = (
            SweepParameter.T,
            SweepParameter.BT,
        ),
        t_grid: Sequence[int] = DEFAULT_T_GRID,
        bt_grid: Sequence[int] = DEFAULT_BT_GRID,
        sampler_cfg: Optional[SamplerConfig] = None,
        boost_cfg: BoostConfig = BoostConfig(),
        bag_cfg: Optional[BagConfig] = None,
        branch_features: BranchFeatures = "endpoints",
        dataset: Optional[Dataset] = None,
        out: Optional[Union[str, Path]] = None,
    ) -> Tuple[List[SweepCurve], RunManifest]:
        """Test and train RMSE against T and/or BT, one CSV and SVG per curve"""
        network = self.resolve_case(case)
        cfg = sampler_cfg or self.sampler_config(network)
        bag_cfg = bag_cfg or BagConfig(seed=cfg.seed)
        wanted = [SweepParameter(p) for p in parameters]
        if not wanted:
            raise ValueError("at least one sweep parameter is required")
        directory = self.run_dir("sweep", network.name, out)
        manifest = self._manifest("sweep", directory, case, network, cfg)
        manifest.configs.update(
            boost=asdict(boost_cfg),
            bag=asdict(bag_cfg),
            t_grid=list(t_grid),
            bt_grid=list(bt_grid),
            branch_features=branch_features,
        )

        if dataset is None:
            with manifest.stage("generate"):
                dataset = generate(network, cfg, jobs=self.config.jobs)

        curves = []
        for parameter in wanted:
            with manifest.stage(f"sweep_{parameter.value}"):
                if parameter is SweepParameter.T:
                    curve = sweep_boosting(
                        network,
                        t_grid,
                        cfg,
                        boost_cfg,
                        dataset,
                        self.config.jobs,
                        branch_features,
                    )
                else:
                    curve = sweep_bagging(
                        network,
                        bt_grid,
                        cfg,
                        bag_cfg,
                        dataset,
                        self.config.jobs,
                        branch_features,
                    )
            stem = f"sweep_{parameter.value}"
            manifest.add(*curve.to_csv(directory / f"{stem}.csv"))
            manifest.add(plot_sweep(curve, directory / f"{stem}.svg"))
            curves.append(curve)
        manifest.write()
        return curves, manifest

    def opf(
        self,
        case: CaseLike,
        methods: Sequence[str] = ("gb",),
        sampler_cfg: Optional[SamplerConfig] = None,
        boost_cfg: BoostConfig = BoostConfig(),
        bag_cfg: Optional[BagConfig] = None,
        pr_ridge: float = 0.0,
        model_path: Optional[Union[str, Path]] = None,
        solver: SolverOptions = SolverOptions(),
        branch_features: BranchFeatures = "endpoints",
        dataset: Optional[Dataset] = None,
        out: Optional[Union[str, Path]] = None,
    ) -> Tuple[List[OpfSolution], RunManifest]:
        """DDCR from fitted models and/or DC-OPF, with a gap table

        ``methods`` takes ``gb``, ``pr`` and ``bag`` (DDCR built from that
        method's models, fitted on the full dataset unless ``model_path``
        supplies them) and ``dc``. Writes one solution JSON per method,
        ``gap.csv`` and the fitted models.

        Raises:
            ModelError: ``model_path`` holds models of another method or topology
        """
        network = self.resolve_case(case)
        cfg = sampler_cfg or self.sampler_config(network)
        bag_cfg = bag_cfg or BagConfig(seed=cfg.seed)
        names = list(dict.fromkeys(m.lower() for m in methods))
        unknown = [m for m in names if m not in OPF_METHODS]
        if unknown or not names:
            raise ValueError(f"OPF methods must be drawn from {OPF_METHODS}")
        learned = [Method.parse(m) for m in names if m != "dc"]
        if model_path is not None and len(learned) != 1:
            raise ValueError("a model file applies to exactly one learned method")

        directory = self.run_dir("opf", network.name, out)
        manifest = self._manifest("opf", directory, case, network, cfg)
        manifest.configs.update(
            methods=names,
            boost=asdict(boost_cfg),
            bag=asdict(bag_cfg),
            pr_ridge=pr_ridge,
            solver=asdict(solver),
            model_path=None if model_path is None else str(model_path),
            branch_features=branch_features,
        )

        solutions: List[OpfSolution] = []
        if learned and model_path is None and dataset is None:
            with manifest.stage("generate"):
                dataset = generate(network, cfg, jobs=self.config.jobs)
        for method in learned:
            label = _ddcr_label(method)
            with manifest.stage(f"fit_{method.value}"):
                models = self._opf_models(
                    method,
                    network,
                    dataset,
                    model_path,
                    boost_cfg,
                    bag_cfg,
                    pr_ridge,
                    branch_features,
                )
            if model_path is None:
                manifest.add(
                    save_models(models, directory / f"models_{method.value}.json")
                )
            with manifest.stage(f"build_{label}"):
                bus, branches = models.collapsed()
                problem = build_ddcr(network, bus, branches)
                problem.method = label
            with manifest.stage(f"solve_{label}"):
                solution = solve_convex(problem, solver)
            diagnose_ddcr(problem, solution)
            solutions.append(solution)
        if "dc" in names:
            with manifest.stage("solve_DCOPF"):
                solutions.append(solve_dcopf(network, solver))

        frame = gap_report(solutions)
        manifest.add(write_gap_report(frame, directory / "gap.csv"))
        for solution in solutions:
            path = directory / f"solution_{solution.method}.json"
            path.write_text(json.dumps(solution.to_dict(), indent=2))
            manifest.add(path)
        manifest.write()
        return solutions, manifest

    def _opf_models(
        self,
        method: Method,
        network: NetworkCase,
        dataset: Optional[Dataset],
        model_path: Optional[Union[str, Path]],
        boost_cfg: BoostConfig,
        bag_cfg: BagConfig,
        pr_ridge: float,
        branch_features: BranchFeatures,
    ) -> ModelSet:
        if model_path is not None:
            models = load_models(model_path)
            if models.method is not method:
                raise ModelError(
                    f"{model_path} holds {models.method.value} models, "
                    f"not {method.value}"
                )
            return models
        assert dataset is not None
        return fit_models(
            method,
            dataset,
            network,
            boost_cfg,
            bag_cfg,
            pr_ridge,
            self.config.jobs,
            branch_features,
        )

    def reproduce(
        self,
        cases: Sequence[str] = REPRODUCE_CASES,
        seeds: Optional[Sequence[int]] = None,
        t_grid: Sequence[int] = DEFAULT_T_GRID,
        bt_grid: Sequence[int] = DEFAULT_BT_GRID,
        out: Optional[Union[str, Path]] = None,
    ) -> RunManifest:
        """Every experiment on every case with the published defaults

        Per case: dataset, comparison table, T and BT sweeps, and DDCR (GB)
        plus DC-OPF with gaps. One top-level manifest covers all files.
        """
        root = Path(out) if out is not None else self.config.output_root / "reproduce"
        root.mkdir(parents=True, exist_ok=True)
        manifest = RunManifest(
            command="reproduce",
            root=root,
            seed=self.config.seed,
            configs={
                "cases": list(cases),
                "seeds": list(seeds) if seeds else None,
                "t_grid": list(t_grid),
                "bt_grid": list(bt_grid),
                "jobs": self.config.jobs,
            },
        )
        for name in cases:
            network = self.resolve_case(name)
            case_root = root / network.name
            dataset, run = self.generate(network, out=case_root / "generate")
            self._absorb(manifest, run, network.name)
            _, run = self.compare(
                network,
                seeds=seeds,
                dataset=dataset,
                out=case_root / "compare",
            )
            self._absorb(manifest, run, network.name)
            _, run = self.sweep(
                network,
                t_grid=t_grid,
                bt_grid=bt_grid,
                dataset=dataset,
                out=case_root / "sweep",
            )
            self._absorb(manifest, run, network.name)
            _, run = self.opf(
                network, methods=("gb", "dc"), dataset=dataset, out=case_root / "opf"
            )
            self._absorb(manifest, run, network.name)
            logger.info("reproduced %s under %s", network.name, case_root)
        manifest.write()
        return manifest

    @staticmethod
    def _absorb(manifest: RunManifest, run: RunManifest, case_name: str) -> None:
        manifest.merge(run, f"{case_name}/{run.command}")
        manifest.add(run.root / MANIFEST_NAME)
