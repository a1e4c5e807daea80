"""Data-driven convex relaxation of the AC OPF.

Fitted affine maps replace the power-flow equations as one-sided rows:

    A_i X + b_i   <= sum P_G at bus i - P_L,i
    C_i X + d_i   <= sum Q_G at bus i - Q_L,i
    A_k X_k + b_k <= P_k,   C_k X_k + d_k <= Q_k        (rated branches)
    e_i^2 + f_i^2 <= V_max,i^2
    P_k^2 + Q_k^2 <= S_max,k^2                          (rated branches)

plus generator boxes and f = 0 at the slack bus. Loads are cvxpy
parameters, so re-solving under new loads does not rebuild the program.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import cvxpy as cp
import numpy as np

from ..exceptions import ModelError
from ..learners import LinearModel
from ..network.case import NetworkCase
from ..powerflow.flows import FlowRecord, VoltageState
from .solver import ConvexOpfProblem, OpfSolution, generation_cost, generator_bounds

logger = logging.getLogger(__name__)

# Dispatch shortfalls below this are solver noise
SHORTFALL_TOL_MW = 1e-3


@dataclass
class DdcrProblem(ConvexOpfProblem):
    """DDCR program plus the coefficient data it was built from"""

    p_load: Optional[cp.Parameter] = None
    q_load: Optional[cp.Parameter] = None
    bus_model: Optional[LinearModel] = None
    branch_models: List[LinearModel] = field(default_factory=list)
    counts: Dict[str, int] = field(default_factory=dict)

    def set_loads(self, p_load: np.ndarray, q_load: np.ndarray) -> None:
        """Replace the per-unit bus loads (constraint right-hand sides only)"""
        assert self.p_load is not None and self.q_load is not None
        self.p_load.value = np.asarray(p_load, dtype=float)
        self.q_load.value = np.asarray(q_load, dtype=float)


def _check_models(
    case: NetworkCase, bus_model: LinearModel, branch_models: Sequence[LinearModel]
) -> None:
    n = case.n_bus
    if bus_model.degree != 1 or any(m.degree != 1 for m in branch_models):
        raise ModelError("the relaxation needs affine (degree 1) models")
    if bus_model.coeffs.shape != (2 * n, 2 * n):
        raise ModelError(
            f"bus model must map {2 * n} voltage features to {2 * n} injections, "
            f"got coefficients of shape {bus_model.coeffs.shape}"
        )
    if len(branch_models) != case.n_branch:
        raise ModelError(
            f"{len(branch_models)} branch models for {case.n_branch} branches"
        )
    for k, (model, branch) in enumerate(zip(branch_models, case.branches)):
        columns = model.feature_map.columns()
        width = 2 * n if columns is None else len(columns)
        if model.coeffs.shape != (2, width):
            raise ModelError(f"branch model {k} must have 2 outputs of {width} inputs")
        if columns is not None and (
            model.feature_map.from_bus != branch.from_bus
            or model.feature_map.to_bus != branch.to_bus
        ):
            raise ModelError(f"branch model {k} reads the wrong endpoint buses")


def _branch_constraints(
    case: NetworkCase,
    branch_models: Sequence[LinearModel],
    rated: Sequence[int],
    x: cp.Variable,
    p_flow: cp.Variable,
    q_flow: cp.Variable,
) -> List[cp.Constraint]:
    constraints: List[cp.Constraint] = []
    for slot, k in enumerate(rated):
        model = branch_models[k]
        columns = model.feature_map.columns()
        x_k = x if columns is None else x[columns]
        flow_p, flow_q = p_flow[slot], q_flow[slot]
        constraints += [
            model.coeffs[0] @ x_k + model.intercept[0] <= flow_p,
            model.coeffs[1] @ x_k + model.intercept[1] <= flow_q,
            cp.norm(cp.hstack([flow_p, flow_q]), 2) <= case.branches[k].s_max,
        ]
    return constraints


def build_ddcr(
    case: NetworkCase,
    bus_model: LinearModel,
    branch_models: Sequence[LinearModel],
) -> DdcrProblem:
    """DDCR program from collapsed bus and branch models

    ``bus_model`` maps the 2n rectangular voltages to [P_1..P_n, Q_1..Q_n];
    ``branch_models[k]`` maps its inputs to (P_k, Q_k).

    Raises:
        ModelError: model dimensions or feature maps do not match the case
    """
    _check_models(case, bus_model, branch_models)
    n = case.n_bus
    incidence = case.generator_incidence()
    a_p, b_p = bus_model.coeffs[:n], bus_model.intercept[:n]
    a_q, b_q = bus_model.coeffs[n:], bus_model.intercept[n:]

    x = cp.Variable(2 * n, name="X")
    p_gen = cp.Variable(case.n_gen, name="P_G")
    q_gen = cp.Variable(case.n_gen, name="Q_G")
    p_load = cp.Parameter(n, name="P_L", value=case.p_load)
    q_load = cp.Parameter(n, name="Q_L", value=case.q_load)

    constraints: List[cp.Constraint] = [
        a_p @ x + b_p <= incidence @ p_gen - p_load,
        a_q @ x + b_q <= incidence @ q_gen - q_load,
    ]
    for i, bus in enumerate(case.buses):
        constraints.append(cp.norm(x[2 * i : 2 * i + 2], 2) <= bus.v_max)
    constraints.append(x[2 * case.slack_index + 1] == 0)
    constraints += generator_bounds(case, p_gen)
    q_min = np.array([g.q_min for g in case.generators])
    q_max = np.array([g.q_max for g in case.generators])
    constraints += [q_gen >= q_min, q_gen <= q_max]

    rated = [k for k, branch in enumerate(case.branches) if branch.is_rated]
    p_flow: Optional[cp.Variable] = None
    q_flow: Optional[cp.Variable] = None
    if rated:
        p_flow = cp.Variable(len(rated), name="P_ij")
        q_flow = cp.Variable(len(rated), name="Q_ij")
        constraints += _branch_constraints(
            case, branch_models, rated, x, p_flow, q_flow
        )

    counts = {
        "bus_rows": 2 * n,
        "voltage_balls": n,
        "branch_rows": 2 * len(rated),
        "branch_balls": len(rated),
        "generator_bounds": 4 * case.n_gen,
    }
    logger.debug("DDCR for %s: %s", case.name, counts)
    problem = cp.Problem(cp.Minimize(generation_cost(case, p_gen)), constraints)
    return DdcrProblem(
        case=case,
        method="DDCR",
        problem=problem,
        p_gen=p_gen,
        q_gen=q_gen,
        voltages=x,
        p_flow=p_flow,
        q_flow=q_flow,
        flow_branches=rated,
        p_load=p_load,
        q_load=q_load,
        bus_model=bus_model,
        branch_models=list(branch_models),
        counts=counts,
    )


@dataclass(frozen=True)
class RelaxationCheck:
    """How an AC operating point sits against the DDCR constraint set

    Positive values are violations. ``bus_row_excess`` is informative only:
    the fitted rows are one-sided and may be violated by a fitted model's
    error.
    """

    voltage_ball_excess: float
    branch_ball_excess: float
    bus_row_excess: float

    @property
    def balls_satisfied(self) -> bool:
        return self.voltage_ball_excess <= 1e-9 and self.branch_ball_excess <= 1e-9


def check_relaxation(
    problem: DdcrProblem,
    state: VoltageState,
    flows: FlowRecord,
) -> RelaxationCheck:
    """Evaluate an AC operating point against the DDCR ball and bus rows"""
    case = problem.case
    v_max = np.array([b.v_max for b in case.buses])
    voltage_excess = float(np.max(state.magnitude**2 - v_max**2))

    rated = problem.flow_branches
    if rated:
        s_max = np.array([case.branches[k].s_max for k in rated])
        s_sq = flows.p_flow[rated] ** 2 + flows.q_flow[rated] ** 2
        branch_excess = float(np.max(s_sq - s_max**2))
    else:
        branch_excess = float("-inf")

    assert problem.bus_model is not None
    predicted = problem.bus_model.predict_features(state.as_features())
    injections = np.r_[flows.p_inj, flows.q_inj]
    row_excess = float(np.max(predicted - injections))
    return RelaxationCheck(voltage_excess, branch_excess, row_excess)


@dataclass(frozen=True)
class DdcrDiagnostics:
    """Physical plausibility of a DDCR optimum

    An AC operating point generates its load plus non-negative losses. A
    positive ``balance_shortfall_mw`` means the one-sided bus rows were met
    with voltages where the fitted injections predict negative losses.
    """

    generation_mw: float
    load_mw: float
    predicted_losses_mw: float
    min_voltage: float
    max_voltage: float

    @property
    def balance_shortfall_mw(self) -> float:
        return self.load_mw - self.generation_mw

    def to_dict(self) -> Dict[str, float]:
        return {
            "generation_mw": self.generation_mw,
            "load_mw": self.load_mw,
            "balance_shortfall_mw": self.balance_shortfall_mw,
            "predicted_losses_mw": self.predicted_losses_mw,
            "min_voltage": self.min_voltage,
            "max_voltage": self.max_voltage,
        }


def diagnose_ddcr(
    problem: DdcrProblem, solution: OpfSolution
) -> Optional[DdcrDiagnostics]:
    """Power balance and voltage range of a solved DDCR program

    The result is also stored in ``solution.diagnostics``. None when the
    solution has no voltages.
    """
    if solution.voltages is None or not np.all(np.isfinite(solution.p_gen)):
        return None
    assert problem.bus_model is not None and problem.p_load is not None
    case = problem.case
    x = solution.voltages
    magnitude = np.hypot(x[0::2], x[1::2])
    predicted = problem.bus_model.predict_features(x)
    diagnostics = DdcrDiagnostics(
        generation_mw=float(np.sum(solution.p_gen)) * case.base_mva,
        load_mw=float(np.sum(problem.p_load.value)) * case.base_mva,
        predicted_losses_mw=float(np.sum(predicted[: case.n_bus])) * case.base_mva,
        min_voltage=float(np.min(magnitude)),
        max_voltage=float(np.max(magnitude)),
    )
    if diagnostics.balance_shortfall_mw > SHORTFALL_TOL_MW:
        logger.warning(
            "%s on %s dispatches %.1f MW below load; fitted losses %.1f MW, "
            "|V| in [%.3g, %.3g]",
            problem.method,
            case.name,
            diagnostics.balance_shortfall_mw,
            diagnostics.predicted_losses_mw,
            diagnostics.min_voltage,
            diagnostics.max_voltage,
        )
    solution.diagnostics = diagnostics.to_dict()
    return diagnostics
