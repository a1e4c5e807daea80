"""Convex OPF from fitted affine power-flow models, with a DC-OPF baseline"""

from .dcopf import DcopfProblem, build_dc_matrices, build_dcopf, solve_dcopf
from .ddcr import (
    SHORTFALL_TOL_MW,
    DdcrDiagnostics,
    DdcrProblem,
    RelaxationCheck,
    build_ddcr,
    check_relaxation,
    diagnose_ddcr,
)
from .gap import REFERENCE_OBJECTIVES, gap_report, relative_gap, write_gap_report
from .solver import (
    CERTIFICATION_TOL,
    ConvexOpfProblem,
    OpfSolution,
    OpfStatus,
    SolverOptions,
    infeasibility_residual,
    kkt_residual,
    solve_convex,
)

__all__ = [
    "CERTIFICATION_TOL",
    "ConvexOpfProblem",
    "DcopfProblem",
    "DdcrDiagnostics",
    "DdcrProblem",
    "OpfSolution",
    "OpfStatus",
    "REFERENCE_OBJECTIVES",
    "RelaxationCheck",
    "SHORTFALL_TOL_MW",
    "SolverOptions",
    "build_dc_matrices",
    "build_dcopf",
    "build_ddcr",
    "check_relaxation",
    "diagnose_ddcr",
    "gap_report",
    "infeasibility_residual",
    "kkt_residual",
    "relative_gap",
    "solve_convex",
    "solve_dcopf",
    "write_gap_report",
]
