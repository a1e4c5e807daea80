"""Command-line front end: ``ensemble-powerflow <command> [flags]``

Exit codes: 0 success, 2 input error, 3 infeasible or non-convergent,
4 internal error.
"""

import argparse
import logging
import sys
from typing import Any, Callable, Dict, List, Optional, Sequence

from . import __version__
from .config.config_manager import ConfigManager
from .evaluation import SweepParameter
from .exceptions import (
    CaseError,
    DataGenerationError,
    ModelError,
    OpfInfeasibleError,
    PowerFlowError,
)
from .learners import BagConfig, BoostConfig, StepRule
from .opf import OpfStatus, SolverOptions
from .pipeline import (
    DEFAULT_BT_GRID,
    DEFAULT_T_GRID,
    OPF_METHODS,
    REPRODUCE_CASES,
    ExperimentRunner,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_INFEASIBLE = 3
EXIT_INTERNAL = 4

Handler = Callable[[ExperimentRunner, argparse.Namespace], int]


def _int_list(text: str) -> List[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected comma-separated integers, got '{text}'"
        ) from None


def _add_run_flags(
    parser: argparse.ArgumentParser,
    default_dir: str = "<output root>/<case>/<command>",
) -> None:
    parser.add_argument("--seed", type=int, help="base random seed")
    parser.add_argument("--jobs", type=int, help="worker processes")
    parser.add_argument("--out", help=f"run directory (default {default_dir})")
    parser.add_argument("--log-level", help="DEBUG, INFO, WARNING or ERROR")


def _add_sampler_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--case", default="case5", help="bundled case name or .m/.json file"
    )
    parser.add_argument("--samples", type=int, help="number of load samples")
    parser.add_argument("--split", type=float, help="training fraction (default 0.5)")
    parser.add_argument("--load-min", type=float, help="lowest load scale factor")
    parser.add_argument("--load-max", type=float, help="highest load scale factor")


def _add_learner_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--learners", "-T", type=int, default=200, help="boosting stages"
    )
    parser.add_argument(
        "--bootstraps", "-BT", type=int, default=50, help="bagging members"
    )
    parser.add_argument(
        "--theta", type=float, default=0.1, help="constant boosting step size"
    )
    parser.add_argument(
        "--line-search",
        action="store_true",
        help="exact line search instead of a constant step",
    )
    parser.add_argument(
        "--ridge", type=float, default=0.0, help="ridge penalty for every fit"
    )
    parser.add_argument(
        "--sample-size", type=int, help="bootstrap sample size (default M)"
    )
    parser.add_argument(
        "--branch-features",
        choices=("endpoints", "all_buses"),
        default="endpoints",
        help="inputs of the branch-flow models",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ensemble-powerflow",
        description="Ensemble-learned linear power flow models and convex OPF",
    )
    parser.add_argument("--version", action="version", version=__version__)
    commands = parser.add_subparsers(dest="command", required=True)

    generate = commands.add_parser("generate", help="Monte Carlo dataset")
    _add_sampler_flags(generate)
    _add_run_flags(generate)
    generate.set_defaults(handler=_cmd_generate)

    compare = commands.add_parser("compare", help="PR / GB / Bagging RMSE table")
    _add_sampler_flags(compare)
    _add_learner_flags(compare)
    _add_run_flags(compare)
    compare.add_argument(
        "--seeds", type=int, help="repeat over N seeds and add median columns"
    )
    compare.set_defaults(handler=_cmd_compare)

    sweep = commands.add_parser("sweep", help="RMSE against T and BT")
    _add_sampler_flags(sweep)
    _add_learner_flags(sweep)
    _add_run_flags(sweep)
    sweep.add_argument(
        "--param", choices=("T", "BT", "both"), default="both", help="swept setting"
    )
    sweep.add_argument(
        "--t-grid",
        type=_int_list,
        default=list(DEFAULT_T_GRID),
        help="comma-separated stage counts",
    )
    sweep.add_argument(
        "--bt-grid",
        type=_int_list,
        default=list(DEFAULT_BT_GRID),
        help="comma-separated member counts",
    )
    sweep.set_defaults(handler=_cmd_sweep)

    opf = commands.add_parser("opf", help="DDCR and DC optimal power flow")
    _add_sampler_flags(opf)
    _add_learner_flags(opf)
    _add_run_flags(opf)
    opf.add_argument(
        "--method",
        choices=OPF_METHODS + ("all",),
        default="gb",
        help="source of the DDCR coefficients, or dc for DC-OPF",
    )
    opf.add_argument("--model", help="saved model set to use instead of fitting")
    opf.add_argument("--tol", type=float, default=1e-8, help="solver tolerance")
    opf.add_argument(
        "--max-iter", type=int, default=200, help="solver iteration limit"
    )
    opf.set_defaults(handler=_cmd_opf)

    reproduce = commands.add_parser(
        "reproduce", help="every experiment on the IEEE cases"
    )
    _add_run_flags(reproduce, default_dir="<output root>/reproduce")
    reproduce.add_argument(
        "--cases",
        default=",".join(REPRODUCE_CASES),
        help="comma-separated case names",
    )
    reproduce.add_argument("--seeds", type=int, help="repeat comparisons over N seeds")
    reproduce.set_defaults(handler=_cmd_reproduce)
    return parser


def _sampler_overrides(args: argparse.Namespace) -> Dict[str, Any]:
    flags = {
        "n_samples": getattr(args, "samples", None),
        "split_fraction": getattr(args, "split", None),
        "load_scale_min": getattr(args, "load_min", None),
        "load_scale_max": getattr(args, "load_max", None),
    }
    return {k: v for k, v in flags.items() if v is not None}


def _boost_config(args: argparse.Namespace) -> BoostConfig:
    return BoostConfig(
        n_learners=args.learners,
        learning_rate_mode=(
            StepRule.LINE_SEARCH if args.line_search else StepRule.CONSTANT
        ),
        theta=args.theta,
        ridge_lambda=args.ridge,
    )


def _bag_config(args: argparse.Namespace, seed: int) -> BagConfig:
    return BagConfig(
        n_bootstraps=args.bootstraps,
        sample_size=args.sample_size,
        seed=seed,
        ridge_lambda=args.ridge,
    )


def _seed_list(base: int, count: Optional[int]) -> Optional[List[int]]:
    if count is None:
        return None
    if count < 1:
        raise ValueError(f"--seeds must be at least 1, got {count}")
    return [base + k for k in range(count)]


def _cmd_generate(runner: ExperimentRunner, args: argparse.Namespace) -> int:
    dataset, manifest = runner.generate(args.case, out=args.out)
    print(
        f"{dataset.n_samples} samples for {manifest.case} "
        f"({dataset.meta.failed_samples} failed draws) in {manifest.root}"
    )
    return EXIT_OK


def _cmd_compare(runner: ExperimentRunner, args: argparse.Namespace) -> int:
    seed = runner.config.seed
    result, manifest = runner.compare(
        args.case,
        boost_cfg=_boost_config(args),
        bag_cfg=_bag_config(args, seed),
        pr_ridge=args.ridge,
        seeds=_seed_list(seed, args.seeds),
        branch_features=args.branch_features,
        out=args.out,
    )
    print(result.to_frame().to_string(index=False))
    print(f"written to {manifest.root}")
    return EXIT_OK


def _cmd_sweep(runner: ExperimentRunner, args: argparse.Namespace) -> int:
    if args.param == "both":
        parameters: Sequence[SweepParameter] = (SweepParameter.T, SweepParameter.BT)
    else:
        parameters = (SweepParameter(args.param),)
    curves, manifest = runner.sweep(
        args.case,
        parameters,
        t_grid=args.t_grid,
        bt_grid=args.bt_grid,
        boost_cfg=_boost_config(args),
        bag_cfg=_bag_config(args, runner.config.seed),
        branch_features=args.branch_features,
        out=args.out,
    )
    for curve in curves:
        test = curve.to_frame().query("split == 'test'")
        print(test.pivot(index="value", columns="family", values="rmse").to_string())
    print(f"written to {manifest.root}")
    return EXIT_OK


def _cmd_opf(runner: ExperimentRunner, args: argparse.Namespace) -> int:
    methods = OPF_METHODS if args.method == "all" else (args.method,)
    solutions, manifest = runner.opf(
        args.case,
        methods,
        boost_cfg=_boost_config(args),
        bag_cfg=_bag_config(args, runner.config.seed),
        pr_ridge=args.ridge,
        model_path=args.model,
        solver=SolverOptions(tol=args.tol, max_iter=args.max_iter),
        branch_features=args.branch_features,
        out=args.out,
    )
    for solution in solutions:
        gap = solution.gap_vs_reference
        print(
            f"{solution.method}: {solution.status.value}, "
            f"objective {solution.objective:.2f} $/hr"
            + ("" if gap is None else f", gap {gap:+.4%}")
        )
    print(f"written to {manifest.root}")
    failed = [
        s
        for s in solutions
        if s.status in (OpfStatus.INFEASIBLE, OpfStatus.MAX_ITER)
    ]
    if failed:
        names = ", ".join(f"{s.method} ({s.status.value})" for s in failed)
        print(f"error: no optimal solution for {names}", file=sys.stderr)
        return EXIT_INFEASIBLE
    return EXIT_OK


def _cmd_reproduce(runner: ExperimentRunner, args: argparse.Namespace) -> int:
    cases = [c.strip() for c in args.cases.split(",") if c.strip()]
    manifest = runner.reproduce(
        cases, seeds=_seed_list(runner.config.seed, args.seeds), out=args.out
    )
    print(f"{len(manifest.artifacts)} artifacts under {manifest.root}")
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = ConfigManager(
            jobs=args.jobs,
            seed=args.seed,
            log_level=args.log_level,
        )
        logging.basicConfig(
            level=config.log_level,
            format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        )
        runner = ExperimentRunner(
            config, sampler_overrides=_sampler_overrides(args)
        )
        handler: Handler = args.handler
        return handler(runner, args)
    except OpfInfeasibleError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (CaseError, ModelError, FileNotFoundError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except (PowerFlowError, DataGenerationError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except Exception as e:
        logger.exception("internal error")
        print(f"internal error: {e}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
