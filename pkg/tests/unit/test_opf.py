import math

import numpy as np
import pytest

from ensemble_powerflow.evaluation import Method, fit_models
from ensemble_powerflow.exceptions import ModelError, OpfInfeasibleError
from ensemble_powerflow.learners import FeatureMap, LinearModel, fit_ols
from ensemble_powerflow.network import load_case
from ensemble_powerflow.opf import (
    CERTIFICATION_TOL,
    OpfStatus,
    SolverOptions,
    build_dc_matrices,
    build_dcopf,
    build_ddcr,
    check_relaxation,
    diagnose_ddcr,
    infeasibility_residual,
    solve_convex,
    solve_dcopf,
)
from ensemble_powerflow.powerflow import compute_flows, solve_ac


def _exact_two_bus_models(p_inj):
    """Zero-coefficient models predicting fixed injections for the two-bus case"""
    bus = LinearModel(
        coeffs=np.zeros((4, 4)), intercept=np.array([p_inj[0], p_inj[1], 0.0, 0.0])
    )
    branch = LinearModel(
        coeffs=np.zeros((2, 4)),
        intercept=np.zeros(2),
        feature_map=FeatureMap.endpoints(0, 1),
    )
    return bus, [branch]


@pytest.fixture(scope="module")
def case5_pr_models(case5, case5_dataset):
    return fit_models(Method.PR, case5_dataset, case5).collapsed()


class TestBuildDdcr:
    def test_case5_constraint_counts(self, case5, case5_pr_models):
        """Test row, ball and bound counts for case5"""
        bus, branches = case5_pr_models

        problem = build_ddcr(case5, bus, branches)

        assert problem.counts == {
            "bus_rows": 10,
            "voltage_balls": 5,
            "branch_rows": 4,
            "branch_balls": 2,
            "generator_bounds": 20,
        }
        assert problem.flow_branches == [0, 5]

    def test_wrong_bus_model_shape_raises_error(self, case5, case5_pr_models):
        """Test that the bus model must map 2n inputs to 2n outputs"""
        _, branches = case5_pr_models
        bus = LinearModel(coeffs=np.zeros((4, 4)), intercept=np.zeros(4))

        with pytest.raises(ModelError, match="bus model must map"):
            build_ddcr(case5, bus, branches)

    def test_branch_model_on_wrong_buses_raises_error(self, case5, case5_pr_models):
        """Test that branch models must read their own endpoints"""
        bus, branches = case5_pr_models
        swapped = [branches[1]] + list(branches[1:])

        with pytest.raises(ModelError, match="wrong endpoint"):
            build_ddcr(case5, bus, swapped)

    def test_polynomial_model_raises_error(self, two_bus_case):
        """Test that only affine models can enter the relaxation"""
        x = np.random.default_rng(0).normal(size=(12, 4))
        bus = fit_ols(x, x, degree=2)
        _, branches = _exact_two_bus_models([0.5, -0.5])

        with pytest.raises(ModelError, match="affine"):
            build_ddcr(two_bus_case, bus, branches)


class TestSolveDdcr:
    def test_exact_model_dispatches_the_load(self, two_bus_case):
        """Test that exact injections force P_G to the 0.5 p.u. demand"""
        bus, branches = _exact_two_bus_models([0.5, -0.5])

        solution = solve_convex(build_ddcr(two_bus_case, bus, branches))

        assert solution.status is OpfStatus.OPTIMAL
        assert solution.p_gen[0] == pytest.approx(0.5, abs=1e-6)
        # 100 + 20 * 50 + 0.01 * 50^2
        assert solution.objective == pytest.approx(1125.0, rel=1e-6)
        assert solution.to_dict()["p_gen_mw"][0] == pytest.approx(50.0, abs=1e-4)

    def test_zero_load_costs_minimum_output(self, two_bus_case):
        """Test that with no load every generator sits at P_min"""
        case = two_bus_case.with_loads([0.0, 0.0], [0.0, 0.0])
        bus, branches = _exact_two_bus_models([0.0, 0.0])

        solution = solve_convex(build_ddcr(case, bus, branches))

        expected = sum(g.cost_at(g.p_min, case.base_mva) for g in case.generators)
        assert solution.objective == pytest.approx(expected, abs=1e-5)

    def test_exact_model_balances_generation_and_load(self, two_bus_case):
        """Test diagnostics of a DDCR optimum with lossless exact injections"""
        bus, branches = _exact_two_bus_models([0.5, -0.5])
        problem = build_ddcr(two_bus_case, bus, branches)
        solution = solve_convex(problem)

        diagnostics = diagnose_ddcr(problem, solution)

        assert diagnostics is not None
        assert diagnostics.generation_mw == pytest.approx(50.0, abs=1e-4)
        assert diagnostics.load_mw == pytest.approx(50.0)
        assert diagnostics.balance_shortfall_mw == pytest.approx(0.0, abs=1e-4)
        assert diagnostics.predicted_losses_mw == pytest.approx(0.0, abs=1e-9)
        assert solution.diagnostics == diagnostics.to_dict()
        assert solution.to_dict()["diagnostics"]["load_mw"] == pytest.approx(50.0)

    def test_negative_fitted_losses_show_as_shortfall(self, two_bus_case, caplog):
        """Test a fitted slack injection below the load it must serve"""
        # the bus-1 row only asks P_G >= 0.3 while bus 2 draws 0.5
        bus, branches = _exact_two_bus_models([0.3, -0.5])
        problem = build_ddcr(two_bus_case, bus, branches)
        solution = solve_convex(problem)

        with caplog.at_level("WARNING"):
            diagnostics = diagnose_ddcr(problem, solution)

        assert solution.status is OpfStatus.OPTIMAL
        # 100 + 20 * 30 + 0.01 * 30^2
        assert solution.objective == pytest.approx(709.0, rel=1e-6)
        assert diagnostics.balance_shortfall_mw == pytest.approx(20.0, abs=1e-4)
        assert diagnostics.predicted_losses_mw == pytest.approx(-20.0, abs=1e-9)
        assert "20.0 MW below load" in caplog.text

    def test_solution_without_voltages_has_no_diagnostics(self, two_bus_case):
        """Test that a DC-OPF solution is not diagnosed"""
        bus, branches = _exact_two_bus_models([0.5, -0.5])
        problem = build_ddcr(two_bus_case, bus, branches)
        dc = solve_dcopf(two_bus_case)

        assert diagnose_ddcr(problem, dc) is None
        assert dc.diagnostics == {}

    def test_case5_certified_optimal(self, case5, case5_pr_models):
        """Test an optimal, KKT-certified DDCR solution on case5"""
        bus, branches = case5_pr_models

        solution = solve_convex(build_ddcr(case5, bus, branches))

        assert solution.is_optimal
        assert solution.kkt_residual <= CERTIFICATION_TOL
        assert solution.voltages.shape == (10,)
        assert solution.voltages[2 * case5.slack_index + 1] == pytest.approx(
            0.0, abs=1e-7
        )
        s = np.hypot(solution.p_flow, solution.q_flow)
        s_max = np.array([case5.branches[k].s_max for k in solution.flow_branches])
        assert np.all(s <= s_max * (1 + 1e-6))

    def test_lighter_loads_do_not_cost_more(self, case5, case5_pr_models):
        """Test re-solving with reduced load parameters"""
        bus, branches = case5_pr_models
        problem = build_ddcr(case5, bus, branches)
        base = solve_convex(problem)

        problem.set_loads(0.9 * case5.p_load, 0.9 * case5.q_load)
        lighter = solve_convex(problem)

        assert lighter.is_optimal
        assert lighter.objective <= base.objective * (1 + 1e-7)

    def test_ac_operating_point_inside_voltage_balls(
        self, case5, case5_pr_models
    ):
        """Test the converged base-case AC state against the DDCR balls"""
        bus, branches = case5_pr_models
        problem = build_ddcr(case5, bus, branches)
        state = solve_ac(case5)

        check = check_relaxation(problem, state, compute_flows(case5, state))

        assert check.voltage_ball_excess <= 0
        assert math.isfinite(check.bus_row_excess)


class TestDcopf:
    def test_two_bus_dispatch_and_angle(self, two_bus_case):
        """Test P_G = 0.5 and theta_2 = -0.05 over the j0.1 line"""
        solution = solve_dcopf(two_bus_case)

        assert solution.status is OpfStatus.OPTIMAL
        assert solution.p_gen[0] == pytest.approx(0.5, abs=1e-6)
        assert solution.angles[1] == pytest.approx(-0.05, abs=1e-6)
        assert solution.p_flow[0] == pytest.approx(0.5, abs=1e-6)

    def test_dc_matrices(self, two_bus_case):
        """Test the branch flow and incidence matrices of one line"""
        bf, cft, shift = build_dc_matrices(two_bus_case)

        np.testing.assert_allclose(bf.toarray(), [[10.0, -10.0]])
        np.testing.assert_allclose(cft.toarray(), [[1.0, -1.0]])
        np.testing.assert_allclose(shift, [0.0])

    def test_case5_objective(self, case5):
        """Test the case5 DC-OPF cost"""
        solution = solve_dcopf(case5)

        assert solution.is_optimal
        assert solution.objective == pytest.approx(17479.9, rel=0.01)
        assert solution.p_gen.sum() == pytest.approx(case5.p_load.sum(), abs=1e-6)

    def test_infeasible_case(self, fixtures_dir):
        """Test a 50 MW generator facing a 100 MW load"""
        case = load_case(fixtures_dir / "infeasible_two_bus.m")

        solution = solve_dcopf(case)

        assert solution.status is OpfStatus.INFEASIBLE
        # P_G <= 0.5 + t and both bus balances within t need t >= 1/6
        assert solution.kkt_residual == pytest.approx(1 / 6, rel=1e-4)
        assert solution.to_dict()["objective"] is None
        assert np.isnan(solution.p_gen).all()
        assert solution.angles is None
        with pytest.raises(OpfInfeasibleError, match="infeasible") as exc_info:
            solution.raise_for_status()
        assert exc_info.value.residual == pytest.approx(1 / 6, rel=1e-4)

    def test_feasible_program_needs_no_relaxation(self, two_bus_case):
        """Test a zero infeasibility residual on a solvable DC-OPF"""
        problem = build_dcopf(two_bus_case)

        assert infeasibility_residual(problem.problem) == pytest.approx(0.0, abs=1e-7)

    def test_iteration_limit(self, case5):
        """Test that one interior-point iteration is not enough"""
        solution = solve_convex(build_dcopf(case5), SolverOptions(max_iter=1))

        assert solution.status is OpfStatus.MAX_ITER


class TestSolverOptions:
    @pytest.mark.parametrize("kwargs", [{"tol": 0.0}, {"max_iter": 0}])
    def test_invalid_options_raise_error(self, kwargs):
        """Test rejected solver settings"""
        with pytest.raises(ValueError):
            SolverOptions(**kwargs)
