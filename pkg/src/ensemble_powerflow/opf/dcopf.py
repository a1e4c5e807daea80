"""Lossless DC optimal power flow (B-theta formulation)"""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import cvxpy as cp
import numpy as np
from scipy.sparse import csr_matrix, diags

from ..network.case import NetworkCase
from .solver import (
    ConvexOpfProblem,
    OpfSolution,
    SolverOptions,
    generation_cost,
    generator_bounds,
    solve_convex,
)

logger = logging.getLogger(__name__)


def build_dc_matrices(
    case: NetworkCase,
) -> Tuple[csr_matrix, csr_matrix, np.ndarray]:
    """Branch flow matrix Bf, incidence Cft and phase-shift injections

    Branch flows are ``Bf @ theta + shift_injection`` and bus net injections
    are ``Cft.T @ flows``; series resistance and line charging are ignored.
    """
    n, m = case.n_bus, case.n_branch
    from_bus = np.array([br.from_bus for br in case.branches], dtype=int)
    to_bus = np.array([br.to_bus for br in case.branches], dtype=int)
    b = np.array([1.0 / (br.reactance * br.tap_ratio) for br in case.branches])
    shift = np.array([br.phase_shift for br in case.branches])

    rows = np.r_[np.arange(m), np.arange(m)]
    signs = np.r_[np.ones(m), -np.ones(m)]
    cft = csr_matrix((signs, (rows, np.r_[from_bus, to_bus])), shape=(m, n))
    bf = csr_matrix(diags(b) @ cft)
    return bf, cft, -b * shift


@dataclass
class DcopfProblem(ConvexOpfProblem):
    p_load: Optional[cp.Parameter] = None


def build_dcopf(case: NetworkCase) -> DcopfProblem:
    """DC-OPF: angles and dispatch as variables, flow limits on rated branches"""
    n = case.n_bus
    incidence = case.generator_incidence()
    g_shunt = np.array([b.g_shunt for b in case.buses])

    theta = cp.Variable(n, name="theta")
    p_gen = cp.Variable(case.n_gen, name="P_G")
    p_load = cp.Parameter(n, name="P_L", value=case.p_load)

    constraints = [theta[case.slack_index] == 0]
    constraints += generator_bounds(case, p_gen)
    if case.n_branch:
        bf, cft, shift_injection = build_dc_matrices(case)
        flows = bf.toarray() @ theta + shift_injection
        net = cft.T.toarray() @ flows + g_shunt
        constraints.append(incidence @ p_gen - p_load == net)
        rated = [k for k, br in enumerate(case.branches) if br.is_rated]
        if rated:
            s_max = np.array([case.branches[k].s_max for k in rated])
            constraints += [cp.abs(flows[rated]) <= s_max]
    else:
        flows = None
        constraints.append(incidence @ p_gen - p_load == g_shunt)

    problem = cp.Problem(cp.Minimize(generation_cost(case, p_gen)), constraints)
    return DcopfProblem(
        case=case,
        method="DCOPF",
        problem=problem,
        p_gen=p_gen,
        angles=theta,
        p_flow=flows,
        flow_branches=list(range(case.n_branch)),
        p_load=p_load,
    )


def solve_dcopf(
    case: NetworkCase, options: SolverOptions = SolverOptions()
) -> OpfSolution:
    return solve_convex(build_dcopf(case), options)
