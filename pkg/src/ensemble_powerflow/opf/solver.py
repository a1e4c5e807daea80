"""Convex OPF solving with cvxpy/Clarabel and KKT certification of the result"""

import enum
import logging
import math
import time
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import cvxpy as cp
import numpy as np
from cvxpy.constraints import Equality, Inequality

from ..exceptions import OpfError, OpfInfeasibleError
from ..network.case import NetworkCase

logger = logging.getLogger(__name__)

# Optimal solutions must be certified to this KKT residual
CERTIFICATION_TOL = 1e-6


class OpfStatus(str, enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    MAX_ITER = "max_iter"
    INACCURATE = "inaccurate"


_STATUS_MAP = {
    cp.OPTIMAL: OpfStatus.OPTIMAL,
    cp.OPTIMAL_INACCURATE: OpfStatus.INACCURATE,
    cp.INFEASIBLE: OpfStatus.INFEASIBLE,
    cp.INFEASIBLE_INACCURATE: OpfStatus.INFEASIBLE,
    cp.USER_LIMIT: OpfStatus.MAX_ITER,
}


@dataclass(frozen=True)
class SolverOptions:
    tol: float = 1e-8
    max_iter: int = 200
    verbose: bool = False

    def __post_init__(self) -> None:
        if self.tol <= 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be at least 1, got {self.max_iter}")

    def clarabel_kwargs(self) -> Dict[str, Any]:
        return {
            "max_iter": self.max_iter,
            "tol_feas": self.tol,
            "tol_gap_abs": self.tol,
            "tol_gap_rel": self.tol,
            "verbose": self.verbose,
        }


@dataclass
class ConvexOpfProblem:
    """A built cvxpy OPF program together with the variables a solution reports

    ``voltages`` holds the rectangular X vector (DDCR) and ``angles`` the bus
    angles (DC); ``p_flow``/``q_flow`` cover the branches in ``flow_branches``.
    """

    case: NetworkCase
    method: str
    problem: cp.Problem
    p_gen: cp.Variable
    q_gen: Optional[cp.Variable] = None
    voltages: Optional[cp.Variable] = None
    angles: Optional[cp.Variable] = None
    p_flow: Optional[cp.Expression] = None
    q_flow: Optional[cp.Expression] = None
    flow_branches: List[int] = field(default_factory=list)

    @property
    def n_constraints(self) -> int:
        return len(self.problem.constraints)


@dataclass
class OpfSolution:
    """Solver outcome in per-unit

    ``kkt_residual`` is the certified KKT residual of an optimal point, or the
    infeasibility residual of an infeasible program.
    """

    case_name: str
    method: str
    status: OpfStatus
    objective: float
    p_gen: np.ndarray
    q_gen: Optional[np.ndarray]
    voltages: Optional[np.ndarray]
    angles: Optional[np.ndarray]
    p_flow: Optional[np.ndarray]
    q_flow: Optional[np.ndarray]
    flow_branches: List[int]
    kkt_residual: float
    solve_time: float
    base_mva: float
    gap_vs_reference: Optional[float] = None
    diagnostics: Dict[str, float] = field(default_factory=dict)

    @property
    def is_optimal(self) -> bool:
        return self.status is OpfStatus.OPTIMAL

    def to_dict(self) -> Dict[str, Any]:
        """JSON-ready view; dispatch and flows in MW/MVAr, voltages in p.u."""

        def scaled(values: Optional[np.ndarray], factor: float = 1.0) -> Any:
            return None if values is None else (values * factor).tolist()

        return {
            "case": self.case_name,
            "method": self.method,
            "status": self.status.value,
            "objective": _finite_or_none(self.objective),
            "p_gen_mw": scaled(self.p_gen, self.base_mva),
            "q_gen_mvar": scaled(self.q_gen, self.base_mva),
            "voltages": scaled(self.voltages),
            "angles": scaled(self.angles),
            "flow_branches": list(self.flow_branches),
            "p_flow_mw": scaled(self.p_flow, self.base_mva),
            "q_flow_mvar": scaled(self.q_flow, self.base_mva),
            "kkt_residual": _finite_or_none(self.kkt_residual),
            "solve_time": self.solve_time,
            "gap_vs_reference": self.gap_vs_reference,
            "diagnostics": dict(self.diagnostics),
        }

    def raise_for_status(self) -> "OpfSolution":
        if self.status is OpfStatus.INFEASIBLE:
            raise OpfInfeasibleError(
                f"{self.method} OPF for {self.case_name} is infeasible",
                residual=self.kkt_residual,
            )
        if self.status is not OpfStatus.OPTIMAL:
            raise OpfError(
                f"{self.method} OPF for {self.case_name} ended with {self.status.value}"
            )
        return self


def _finite_or_none(value: float) -> Optional[float]:
    return float(value) if value is not None and math.isfinite(value) else None


def kkt_residual(problem: cp.Problem) -> float:
    """Largest of primal infeasibility, dual sign violation and scaled complementarity

    Stationarity is left to the solver's own optimality tolerance.
    """
    primal = 0.0
    dual_sign = 0.0
    complementarity = 0.0
    for constraint in problem.constraints:
        violation = np.atleast_1d(constraint.violation())
        if violation.size:
            primal = max(primal, float(np.max(violation)))
        if not isinstance(constraint, Inequality):
            continue
        dual = constraint.dual_value
        if dual is None:
            continue
        dual = np.atleast_1d(np.asarray(dual, dtype=float))
        slack = np.atleast_1d(np.asarray(constraint.expr.value, dtype=float))
        dual_sign = max(dual_sign, float(np.max(np.maximum(-dual, 0.0))))
        complementarity += float(np.sum(np.abs(dual * slack)))
    scale = 1.0 + abs(float(problem.value))
    return max(primal, dual_sign, complementarity / scale)


def infeasibility_residual(
    problem: cp.Problem, options: Optional[SolverOptions] = None
) -> float:
    """Smallest uniform relaxation t >= 0 of every constraint that admits a point

    Each ``g(x) <= 0`` becomes ``g(x) <= t`` and each ``h(x) == 0`` becomes
    ``|h(x)| <= t``. The duals of the relaxed rows, normalised to unit total
    weight, are a Farkas certificate for the original program and ``t`` is its
    value, so ``t > 0`` certifies infeasibility. NaN if the relaxed program
    cannot be solved.
    """
    t = cp.Variable(nonneg=True, name="t")
    relaxed: List[cp.Constraint] = []
    for constraint in problem.constraints:
        if isinstance(constraint, Inequality):
            relaxed.append(constraint.expr <= t)
        elif isinstance(constraint, Equality):
            relaxed.append(cp.abs(constraint.expr) <= t)
        else:
            raise OpfError(
                f"cannot relax constraint of type {type(constraint).__name__}"
            )
    elastic = cp.Problem(cp.Minimize(t), relaxed)
    kwargs = (options or SolverOptions()).clarabel_kwargs()
    try:
        elastic.solve(solver=cp.CLARABEL, **kwargs)
    except cp.SolverError:
        logger.warning("infeasibility certificate solve failed")
        return float("nan")
    if elastic.status not in (cp.OPTIMAL, cp.OPTIMAL_INACCURATE):
        return float("nan")
    return float(t.value)


def _values(expression: Optional[cp.Expression]) -> Optional[np.ndarray]:
    if expression is None or expression.value is None:
        return None
    return np.atleast_1d(np.asarray(expression.value, dtype=float))


def _no_values(expression: Optional[cp.Expression]) -> Optional[np.ndarray]:
    return None


def solve_convex(
    problem: ConvexOpfProblem, options: SolverOptions = SolverOptions()
) -> OpfSolution:
    """Solve with the Clarabel interior-point method and certify the result

    An OPTIMAL solver answer whose KKT residual exceeds the certification
    tolerance is reported as INACCURATE.

    Raises:
        OpfError: the solver failed or reported an unbounded program
    """
    start = time.perf_counter()
    try:
        problem.problem.solve(solver=cp.CLARABEL, **options.clarabel_kwargs())
    except cp.SolverError as e:
        raise OpfError(f"{problem.method} OPF solver failed: {e}") from e
    elapsed = time.perf_counter() - start

    raw = problem.problem.status
    if raw not in _STATUS_MAP:
        raise OpfError(f"{problem.method} OPF returned solver status '{raw}'")
    status = _STATUS_MAP[raw]

    if status in (OpfStatus.OPTIMAL, OpfStatus.INACCURATE):
        residual = kkt_residual(problem.problem)
        objective = float(problem.problem.value)
        if status is OpfStatus.OPTIMAL and residual > CERTIFICATION_TOL:
            logger.warning(
                "%s OPF on %s: KKT residual %.2e above %.0e, not certified optimal",
                problem.method,
                problem.case.name,
                residual,
                CERTIFICATION_TOL,
            )
            status = OpfStatus.INACCURATE
    elif status is OpfStatus.INFEASIBLE:
        residual = infeasibility_residual(problem.problem, options)
        objective = float("nan")
        logger.info(
            "%s OPF on %s: constraints need a uniform relaxation of %.3e",
            problem.method,
            problem.case.name,
            residual,
        )
    else:
        residual = float("nan")
        objective = float("nan")

    logger.info(
        "%s OPF on %s: %s, objective %.2f $/hr in %.3fs",
        problem.method,
        problem.case.name,
        status.value,
        objective,
        elapsed,
    )
    # the certificate solve leaves its own point in the shared variables
    values = _values if status is not OpfStatus.INFEASIBLE else _no_values
    p_gen = values(problem.p_gen)
    return OpfSolution(
        case_name=problem.case.name,
        method=problem.method,
        status=status,
        objective=objective,
        p_gen=p_gen if p_gen is not None else np.full(problem.case.n_gen, np.nan),
        q_gen=values(problem.q_gen),
        voltages=values(problem.voltages),
        angles=values(problem.angles),
        p_flow=values(problem.p_flow),
        q_flow=values(problem.q_flow),
        flow_branches=list(problem.flow_branches),
        kkt_residual=residual,
        solve_time=elapsed,
        base_mva=problem.case.base_mva,
    )


def generation_cost(case: NetworkCase, p_gen: cp.Variable) -> cp.Expression:
    """Sum over generators of c0 + c1 P + c2 P^2, P in MW, in $/hr"""
    c0 = np.array([g.cost.c0 for g in case.generators])
    c1 = np.array([g.cost.c1 for g in case.generators])
    c2 = np.array([g.cost.c2 for g in case.generators])
    p_mw = case.base_mva * p_gen
    return float(np.sum(c0)) + c1 @ p_mw + cp.sum(cp.multiply(c2, cp.square(p_mw)))


def generator_bounds(case: NetworkCase, p_gen: cp.Variable) -> List[cp.Constraint]:
    p_min = np.array([g.p_min for g in case.generators])
    p_max = np.array([g.p_max for g in case.generators])
    return [p_gen >= p_min, p_gen <= p_max]
