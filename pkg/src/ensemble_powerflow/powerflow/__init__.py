"""Newton-Raphson AC power flow and exact flow equations"""

from .flows import FlowRecord, VoltageState, compute_flows
from .newton import (
    PowerFlowResult,
    mismatch_jacobian,
    newton_raphson,
    power_mismatch,
    scheduled_injections,
    solve_ac,
)

__all__ = [
    "FlowRecord",
    "PowerFlowResult",
    "VoltageState",
    "compute_flows",
    "mismatch_jacobian",
    "newton_raphson",
    "power_mismatch",
    "scheduled_injections",
    "solve_ac",
]
