#!/usr/bin/env python3
"""
Example usage of the ensemble linear power flow toolkit

This script generates a small case5 dataset, compares the least squares,
boosted and bagged models, and solves the convex OPF built from them.
"""

from ensemble_powerflow import ExperimentRunner
from ensemble_powerflow.learners import BagConfig, BoostConfig
from ensemble_powerflow.network import load_case
from ensemble_powerflow.sampling import SamplerConfig


def main():
    """Example usage of the experiment runner"""

    # Initialize the runner (reads ENSEMBLE_PF_* settings from a .env file)
    try:
        runner = ExperimentRunner(output_root="artifacts/example", seed=7)
        case = load_case("case5")
        print(f"✓ Loaded {case.name}: {case.n_bus} buses, {case.n_branch} branches")
    except (ValueError, FileNotFoundError) as e:
        print(f"✗ Configuration error: {e}")
        return

    sampler = SamplerConfig.for_case(case, n_samples=60, seed=7)
    boost = BoostConfig(n_learners=50, theta=0.1)
    bag = BagConfig(n_bootstraps=10, seed=7)

    # Example 1: Monte Carlo dataset
    print("\n--- Example 1: Dataset ---")
    try:
        dataset, manifest = runner.generate(case, sampler)
        print(f"{dataset.n_samples} samples written to {manifest.root}")
        print(f"Failed draws: {dataset.meta.failed_samples}")
    except Exception as e:
        print(f"Error generating data: {e}")
        return

    # Example 2: RMSE comparison of PR, GB and Bagging
    print("\n--- Example 2: Method Comparison ---")
    try:
        report, _ = runner.compare(case, sampler, boost, bag, dataset=dataset)
        test = report.to_frame().query("split == 'test'")
        print(test.pivot(index="family", columns="method", values="rmse_x1e5"))
    except Exception as e:
        print(f"Error in comparison: {e}")

    # Example 3: Error against the number of boosting stages
    print("\n--- Example 3: Boosting Sweep ---")
    try:
        curves, _ = runner.sweep(
            case,
            parameters=["T"],
            t_grid=[1, 5, 10, 50],
            sampler_cfg=sampler,
            boost_cfg=boost,
            dataset=dataset,
        )
        for value, rmse in zip(curves[0].grid, curves[0].values("bus_P")):
            print(f"T={value:3d}: bus_P test RMSE {rmse:.3e}")
    except Exception as e:
        print(f"Error in sweep: {e}")

    # Example 4: DDCR from the boosted models next to DC-OPF
    print("\n--- Example 4: Convex OPF ---")
    try:
        solutions, manifest = runner.opf(
            case, ["gb", "dc"], sampler, boost, bag, dataset=dataset
        )
        for solution in solutions:
            print(
                f"{solution.method}: {solution.status.value}, "
                f"{solution.objective:.2f} $/hr, "
                f"gap {solution.gap_vs_reference:+.3%}"
            )
        print(f"Gap table: {manifest.root / 'gap.csv'}")
    except Exception as e:
        print(f"Error in OPF: {e}")


if __name__ == "__main__":
    main()
