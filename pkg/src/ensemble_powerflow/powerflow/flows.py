"""Rectangular voltage state and the exact injection/branch-flow equations"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.sparse import csr_matrix

from ..network.admittance import build_admittance, build_branch_matrices
from ..network.case import NetworkCase


@dataclass(frozen=True, eq=False)
class VoltageState:
    """Per-bus voltages V_i = e_i + j f_i in per-unit"""

    e: np.ndarray
    f: np.ndarray

    def __post_init__(self) -> None:
        if self.e.shape != self.f.shape or self.e.ndim != 1:
            raise ValueError("e and f must be vectors of equal length")

    @classmethod
    def from_complex(cls, v: np.ndarray) -> "VoltageState":
        return cls(e=np.real(v).copy(), f=np.imag(v).copy())

    @classmethod
    def from_features(cls, x: np.ndarray) -> "VoltageState":
        """Inverse of ``as_features``: x = [e_1, f_1, e_2, f_2, ...]"""
        x = np.asarray(x, dtype=float)
        return cls(e=x[0::2].copy(), f=x[1::2].copy())

    @property
    def n_bus(self) -> int:
        return len(self.e)

    @property
    def complex(self) -> np.ndarray:
        return self.e + 1j * self.f

    @property
    def magnitude(self) -> np.ndarray:
        return np.hypot(self.e, self.f)

    @property
    def angle(self) -> np.ndarray:
        return np.arctan2(self.f, self.e)

    def as_features(self) -> np.ndarray:
        """Interleaved rectangular feature row [e_1, f_1, ..., e_n, f_n]"""
        x = np.empty(2 * self.n_bus)
        x[0::2] = self.e
        x[1::2] = self.f
        return x


@dataclass(frozen=True, eq=False)
class FlowRecord:
    """Net bus injections and from-end branch flows, per-unit"""

    p_inj: np.ndarray
    q_inj: np.ndarray
    p_flow: np.ndarray
    q_flow: np.ndarray

    @property
    def active_losses(self) -> float:
        return float(np.sum(self.p_inj))


def compute_flows(
    case: NetworkCase,
    v: VoltageState,
    ybus: Optional[csr_matrix] = None,
    branch_matrices: Optional[tuple] = None,
) -> FlowRecord:
    """Injections S_i = V_i conj(sum_j Y_ij V_j) and from-end branch flows

    The admittance matrices may be passed in when evaluating many states of
    the same network.
    """
    if v.n_bus != case.n_bus:
        raise ValueError(
            f"voltage state has {v.n_bus} buses, case has {case.n_bus}"
        )
    if ybus is None:
        ybus = build_admittance(case)
    if branch_matrices is None:
        branch_matrices = build_branch_matrices(case)
    yf, _ = branch_matrices

    voltage = v.complex
    s_bus = voltage * np.conj(ybus @ voltage)
    from_bus = np.array([br.from_bus for br in case.branches], dtype=int)
    s_from = voltage[from_bus] * np.conj(yf @ voltage)
    return FlowRecord(
        p_inj=s_bus.real,
        q_inj=s_bus.imag,
        p_flow=np.real(s_from),
        q_flow=np.imag(s_from),
    )
