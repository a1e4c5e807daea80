"""Bus and branch admittance matrices from the pi-model with off-nominal taps"""

from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix

from .case import NetworkCase


@dataclass(frozen=True)
class BranchAdmittances:
    """Per-branch pi-model terms: I_f = yff V_f + yft V_t, I_t = ytf V_f + ytt V_t"""

    yff: np.ndarray
    yft: np.ndarray
    ytf: np.ndarray
    ytt: np.ndarray
    from_bus: np.ndarray
    to_bus: np.ndarray


def branch_admittances(case: NetworkCase) -> BranchAdmittances:
    branches = case.branches
    z = np.array([br.series_impedance for br in branches], dtype=complex)
    ys = 1.0 / z
    bc = np.array([br.total_shunt_susceptance for br in branches])
    tap = np.array([br.tap_ratio for br in branches]) * np.exp(
        1j * np.array([br.phase_shift for br in branches])
    )

    ytt = ys + 1j * bc / 2
    yff = ytt / (tap * np.conj(tap))
    yft = -ys / np.conj(tap)
    ytf = -ys / tap
    return BranchAdmittances(
        yff=yff,
        yft=yft,
        ytf=ytf,
        ytt=ytt,
        from_bus=np.array([br.from_bus for br in branches], dtype=int),
        to_bus=np.array([br.to_bus for br in branches], dtype=int),
    )


def build_branch_matrices(case: NetworkCase) -> tuple:
    """Sparse (Yf, Yt) with I_from = Yf V and I_to = Yt V, one row per branch"""
    adm = branch_admittances(case)
    n, n_br = case.n_bus, case.n_branch
    rows = np.r_[np.arange(n_br), np.arange(n_br)]
    cols = np.r_[adm.from_bus, adm.to_bus]
    yf = csr_matrix((np.r_[adm.yff, adm.yft], (rows, cols)), shape=(n_br, n))
    yt = csr_matrix((np.r_[adm.ytf, adm.ytt], (rows, cols)), shape=(n_br, n))
    return yf, yt


def build_admittance(case: NetworkCase) -> csr_matrix:
    """Sparse nodal admittance matrix Y (n x n), Y[i][j] per the pi-model"""
    adm = branch_admittances(case)
    n = case.n_bus
    y_shunt = np.array([b.g_shunt + 1j * b.b_shunt for b in case.buses])

    f, t = adm.from_bus, adm.to_bus
    rows = np.r_[f, f, t, t, np.arange(n)]
    cols = np.r_[f, t, f, t, np.arange(n)]
    data = np.r_[adm.yff, adm.yft, adm.ytf, adm.ytt, y_shunt]
    # Duplicate entries (parallel branches) are summed on conversion
    return csr_matrix((data, (rows, cols)), shape=(n, n))
