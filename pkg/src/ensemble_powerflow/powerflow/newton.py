"""Newton-Raphson AC power flow in polar coordinates.

The solution is returned in rectangular form. Reactive limits of PV
generators are not enforced.
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.sparse import csr_matrix, diags, hstack, vstack
from scipy.sparse.linalg import spsolve

from ..exceptions import ConvergenceError, SingularJacobianError
from ..network.admittance import build_admittance
from ..network.case import BusKind, NetworkCase
from .flows import VoltageState

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITER = 30


@dataclass(frozen=True, eq=False)
class PowerFlowResult:
    state: VoltageState
    iterations: int
    mismatch: float


def power_mismatch(
    ybus: csr_matrix, sbus: np.ndarray, v: np.ndarray, pv: np.ndarray, pq: np.ndarray
) -> np.ndarray:
    """Mismatch vector [dP at PV and PQ buses, dQ at PQ buses]"""
    mis = v * np.conj(ybus @ v) - sbus
    pvpq = np.r_[pv, pq]
    return np.r_[mis[pvpq].real, mis[pq].imag]


def mismatch_jacobian(
    ybus: csr_matrix, v: np.ndarray, pv: np.ndarray, pq: np.ndarray
) -> csr_matrix:
    """Jacobian of ``power_mismatch`` w.r.t. [angles at PV+PQ, magnitudes at PQ]"""
    ibus = ybus @ v
    diag_v = diags(v)
    diag_ibus = diags(ibus)
    diag_vnorm = diags(v / np.abs(v))

    ds_dvm = diag_v @ (ybus @ diag_vnorm).conj() + diag_ibus.conj() @ diag_vnorm
    ds_dva = 1j * diag_v @ (diag_ibus - ybus @ diag_v).conj()

    pvpq = np.r_[pv, pq]
    ds_dva = csr_matrix(ds_dva)
    ds_dvm = csr_matrix(ds_dvm)
    j11 = ds_dva[pvpq][:, pvpq].real
    j12 = ds_dvm[pvpq][:, pq].real
    j21 = ds_dva[pq][:, pvpq].imag
    j22 = ds_dvm[pq][:, pq].imag
    return csr_matrix(vstack([hstack([j11, j12]), hstack([j21, j22])]))


def scheduled_injections(case: NetworkCase) -> np.ndarray:
    """Complex scheduled injections S = (P_G - P_L) + j(Q_G - Q_L) per bus"""
    p_gen, q_gen = case.scheduled_generation()
    return (p_gen - case.p_load) + 1j * (q_gen - case.q_load)


def flat_start(case: NetworkCase) -> np.ndarray:
    vm = np.array(
        [b.v_setpoint if b.kind is not BusKind.PQ else 1.0 for b in case.buses]
    )
    return vm.astype(complex)


def newton_raphson(
    case: NetworkCase,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    ybus: Optional[csr_matrix] = None,
) -> PowerFlowResult:
    """Solve the AC power flow from a flat start

    Raises:
        ConvergenceError: mismatch above ``tol`` after ``max_iter`` iterations
        SingularJacobianError: the Newton step could not be computed
    """
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    if ybus is None:
        ybus = build_admittance(case)
    sbus = scheduled_injections(case)
    pv = case.indices_of(BusKind.PV)
    pq = case.indices_of(BusKind.PQ)
    pvpq = np.r_[pv, pq]
    n_pvpq = len(pvpq)

    v = flat_start(case)
    va = np.angle(v)
    vm = np.abs(v)

    mismatch = power_mismatch(ybus, sbus, v, pv, pq)
    norm = float(np.max(np.abs(mismatch))) if mismatch.size else 0.0
    iteration = 0
    while norm > tol:
        if iteration >= max_iter:
            raise ConvergenceError(iteration, norm)
        iteration += 1

        jacobian = mismatch_jacobian(ybus, v, pv, pq)
        dx = -spsolve(jacobian.tocsc(), mismatch)
        if not np.all(np.isfinite(dx)):
            raise SingularJacobianError(iteration)

        va[pvpq] += dx[:n_pvpq]
        vm[pq] += dx[n_pvpq:]
        v = vm * np.exp(1j * va)

        mismatch = power_mismatch(ybus, sbus, v, pv, pq)
        norm = float(np.max(np.abs(mismatch)))
        if not np.isfinite(norm):
            raise ConvergenceError(iteration, norm)
        logger.debug("iteration %d: max mismatch %.3e", iteration, norm)

    return PowerFlowResult(
        state=VoltageState.from_complex(v), iterations=iteration, mismatch=norm
    )


def solve_ac(
    case: NetworkCase, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER
) -> VoltageState:
    """Converged rectangular voltage state of the case"""
    return newton_raphson(case, tol=tol, max_iter=max_iter).state
