"""Exception hierarchy shared across the toolkit"""

from typing import Optional


class EnsemblePowerflowError(Exception):
    """Base class for all toolkit errors"""


class CaseError(EnsemblePowerflowError, ValueError):
    """A case file could not be turned into a valid NetworkCase"""


class CaseSyntaxError(CaseError):
    """Malformed case text (bad matrix row, missing section, bad JSON)"""


class CaseSemanticError(CaseError):
    """Well-formed case text describing an invalid network"""


class PowerFlowError(EnsemblePowerflowError):
    """AC power flow could not be solved"""


class ConvergenceError(PowerFlowError):
    """Newton-Raphson hit its iteration limit"""

    def __init__(self, iterations: int, mismatch: float):
        super().__init__(
            f"power flow did not converge after {iterations} iterations "
            f"(max mismatch {mismatch:.3e} p.u.)"
        )
        self.iterations = iterations
        self.mismatch = mismatch


class SingularJacobianError(PowerFlowError):
    """The mismatch Jacobian could not be factorized"""

    def __init__(self, iteration: int):
        super().__init__(f"singular Jacobian at iteration {iteration}")
        self.iteration = iteration


class DataGenerationError(EnsemblePowerflowError):
    """Too many Monte Carlo draws failed to converge"""


class ModelError(EnsemblePowerflowError, ValueError):
    """Invalid regression inputs or incompatible model usage"""


class EnsembleInvariantError(EnsemblePowerflowError):
    """A mathematical self-check of an ensemble failed"""


class OpfError(EnsemblePowerflowError):
    """Optimal power flow construction or solution failed"""


class OpfInfeasibleError(OpfError):
    """The convex OPF has no feasible point"""

    def __init__(self, message: str, residual: Optional[float] = None):
        super().__init__(message)
        self.residual = residual
