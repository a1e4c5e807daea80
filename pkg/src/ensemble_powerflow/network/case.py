"""Network data model: buses, branches, generators and the validated case"""

import dataclasses
import enum
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from ..exceptions import CaseSemanticError


class BusKind(str, enum.Enum):
    SLACK = "slack"
    PV = "pv"
    PQ = "pq"


@dataclass(frozen=True)
class Bus:
    """A bus; loads and shunts in per-unit on the case base"""

    index: int
    number: int
    kind: BusKind
    p_load: float
    q_load: float
    v_setpoint: float
    v_max: float
    v_min: float
    g_shunt: float = 0.0
    b_shunt: float = 0.0


@dataclass(frozen=True)
class Branch:
    """A pi-model branch between two internal bus indices"""

    from_bus: int
    to_bus: int
    resistance: float
    reactance: float
    total_shunt_susceptance: float = 0.0
    tap_ratio: float = 1.0
    phase_shift: float = 0.0
    s_max: float = 0.0

    @property
    def series_impedance(self) -> complex:
        return complex(self.resistance, self.reactance)

    @property
    def is_rated(self) -> bool:
        return self.s_max > 0.0


@dataclass(frozen=True)
class GenCost:
    """Polynomial cost c0 + c1*P + c2*P^2 in $/hr with P in MW"""

    c0: float = 0.0
    c1: float = 0.0
    c2: float = 0.0

    def evaluate(self, p_mw: float) -> float:
        return self.c0 + self.c1 * p_mw + self.c2 * p_mw * p_mw


@dataclass(frozen=True)
class Generator:
    bus: int
    p_min: float
    p_max: float
    q_min: float
    q_max: float
    p_setpoint: float
    cost: GenCost
    q_setpoint: float = 0.0

    def cost_at(self, p_pu: float, base_mva: float) -> float:
        """Hourly cost of producing ``p_pu`` per-unit"""
        return self.cost.evaluate(p_pu * base_mva)


@dataclass(frozen=True)
class NetworkCase:
    name: str
    base_mva: float
    buses: Tuple[Bus, ...]
    branches: Tuple[Branch, ...]
    generators: Tuple[Generator, ...]

    @property
    def n_bus(self) -> int:
        return len(self.buses)

    @property
    def n_branch(self) -> int:
        return len(self.branches)

    @property
    def n_gen(self) -> int:
        return len(self.generators)

    @property
    def slack_index(self) -> int:
        return next(b.index for b in self.buses if b.kind is BusKind.SLACK)

    def indices_of(self, kind: BusKind) -> np.ndarray:
        return np.array([b.index for b in self.buses if b.kind is kind], dtype=int)

    @property
    def p_load(self) -> np.ndarray:
        return np.array([b.p_load for b in self.buses])

    @property
    def q_load(self) -> np.ndarray:
        return np.array([b.q_load for b in self.buses])

    def generator_incidence(self) -> np.ndarray:
        """n_bus x n_gen matrix with a 1 where generator g sits at bus i"""
        incidence = np.zeros((self.n_bus, self.n_gen))
        for g, gen in enumerate(self.generators):
            incidence[gen.bus, g] = 1.0
        return incidence

    def scheduled_generation(self) -> Tuple[np.ndarray, np.ndarray]:
        """Per-bus sums of generator P and Q setpoints"""
        incidence = self.generator_incidence()
        p = incidence @ np.array([g.p_setpoint for g in self.generators])
        q = incidence @ np.array([g.q_setpoint for g in self.generators])
        return p, q

    def with_loads(
        self, p_load: Sequence[float], q_load: Sequence[float]
    ) -> "NetworkCase":
        """Copy of the case with replaced per-bus loads"""
        buses = tuple(
            dataclasses.replace(bus, p_load=float(p), q_load=float(q))
            for bus, p, q in zip(self.buses, p_load, q_load)
        )
        return dataclasses.replace(self, buses=buses)


def validate_case(case: NetworkCase) -> NetworkCase:
    """Check the structural invariants of a case; returns it unchanged"""
    errors: List[str] = []

    slack = [b for b in case.buses if b.kind is BusKind.SLACK]
    if not slack:
        errors.append("no slack bus")
    elif len(slack) > 1:
        errors.append(f"{len(slack)} slack buses, expected exactly one")

    for bus in case.buses:
        if bus.kind is not BusKind.PQ and not (
            bus.v_min <= bus.v_setpoint <= bus.v_max
        ):
            errors.append(
                f"bus {bus.number}: voltage setpoint {bus.v_setpoint} outside "
                f"[{bus.v_min}, {bus.v_max}]"
            )

    for k, br in enumerate(case.branches):
        endpoints_ok = 0 <= br.from_bus < case.n_bus and 0 <= br.to_bus < case.n_bus
        if not endpoints_ok:
            errors.append(f"branch {k}: dangling branch endpoint")
        elif br.from_bus == br.to_bus:
            errors.append(f"branch {k}: from_bus equals to_bus")
        if abs(br.series_impedance) <= 0.0:
            errors.append(f"branch {k}: zero series impedance")

    for g, gen in enumerate(case.generators):
        if not 0 <= gen.bus < case.n_bus:
            errors.append(f"generator {g}: unknown bus")
        if gen.p_min > gen.p_max:
            errors.append(f"generator {g}: p_min > p_max")
        if gen.q_min > gen.q_max:
            errors.append(f"generator {g}: q_min > q_max")
        if gen.cost.c2 < 0.0:
            errors.append(f"generator {g}: negative c2")

    if errors:
        raise CaseSemanticError("; ".join(errors))

    if case.n_bus > 1:
        rows = [br.from_bus for br in case.branches]
        cols = [br.to_bus for br in case.branches]
        graph = coo_matrix(
            (np.ones(len(rows)), (rows, cols)), shape=(case.n_bus, case.n_bus)
        )
        n_components, _ = connected_components(graph, directed=False)
        if n_components != 1:
            raise CaseSemanticError(
                f"network is not connected ({n_components} islands)"
            )
    return case
