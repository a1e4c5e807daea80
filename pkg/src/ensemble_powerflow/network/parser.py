"""Case codecs: MATPOWER case text, PYPOWER dictionaries and the canonical JSON form"""

import dataclasses
import json
import logging
import math
import re
from typing import Any, Dict, List, Mapping, Optional, Sequence

import numpy as np

from ..exceptions import CaseSemanticError, CaseSyntaxError
from .case import Branch, Bus, BusKind, GenCost, Generator, NetworkCase, validate_case

logger = logging.getLogger(__name__)

# Minimum column counts of the standard MATPOWER matrices
BUS_COLUMNS = 13
GEN_COLUMNS = 10
BRANCH_COLUMNS = 11
GENCOST_COLUMNS = 4

POLYNOMIAL_COST = 2

_BUS_KINDS = {1: BusKind.PQ, 2: BusKind.PV, 3: BusKind.SLACK}

_BASE_MVA_RE = re.compile(r"mpc\.baseMVA\s*=\s*([^;\n]+);")
_MATRIX_RE = re.compile(r"mpc\.(bus|gen|branch|gencost)\s*=\s*\[(.*?)\]\s*;", re.DOTALL)
_NAME_RE = re.compile(r"function\s+mpc\s*=\s*(\w+)")


class CaseParser:
    """Converts case text or matrices into a validated NetworkCase"""

    def parse(self, text: str, name: Optional[str] = None) -> NetworkCase:
        """Parse MATPOWER text or canonical JSON, detected from the content"""
        if text.lstrip().startswith("{"):
            return self.parse_json(text)
        return self.parse_matpower(text, name)

    def parse_matpower(self, text: str, name: Optional[str] = None) -> NetworkCase:
        """Parse a MATPOWER ``.m`` case file body"""
        base_match = _BASE_MVA_RE.search(text)
        if base_match is None:
            raise CaseSyntaxError("missing mpc.baseMVA")
        try:
            base_mva = float(base_match.group(1).strip())
        except ValueError:
            raise CaseSyntaxError(
                f"malformed mpc.baseMVA value '{base_match.group(1).strip()}'"
            ) from None

        matrices: Dict[str, List[List[float]]] = {}
        for section, body in _MATRIX_RE.findall(text):
            matrices[section] = self._parse_matrix(section, body)

        for section in ("bus", "gen", "branch"):
            if section not in matrices:
                raise CaseSyntaxError(f"missing mpc.{section} matrix")

        if name is None:
            name_match = _NAME_RE.search(text)
            name = name_match.group(1) if name_match else "case"

        return self.from_matrices(
            name,
            base_mva,
            matrices["bus"],
            matrices["gen"],
            matrices["branch"],
            matrices.get("gencost"),
        )

    def from_ppc(self, ppc: Mapping[str, Any], name: str) -> NetworkCase:
        """Convert a PYPOWER case dictionary"""
        return self.from_matrices(
            name,
            float(ppc["baseMVA"]),
            np.asarray(ppc["bus"], dtype=float).tolist(),
            np.asarray(ppc["gen"], dtype=float).tolist(),
            np.asarray(ppc["branch"], dtype=float).tolist(),
            (
                np.asarray(ppc["gencost"], dtype=float).tolist()
                if "gencost" in ppc
                else None
            ),
        )

    def from_matrices(
        self,
        name: str,
        base_mva: float,
        bus_rows: Sequence[Sequence[float]],
        gen_rows: Sequence[Sequence[float]],
        branch_rows: Sequence[Sequence[float]],
        gencost_rows: Optional[Sequence[Sequence[float]]] = None,
    ) -> NetworkCase:
        """Build a per-unit NetworkCase from MATPOWER-ordered matrix rows"""
        if base_mva <= 0:
            raise CaseSemanticError(f"baseMVA must be positive, got {base_mva}")
        self._check_widths("bus", bus_rows, BUS_COLUMNS)
        self._check_widths("gen", gen_rows, GEN_COLUMNS)
        self._check_widths("branch", branch_rows, BRANCH_COLUMNS)

        index_of = {int(row[0]): k for k, row in enumerate(bus_rows)}
        if len(index_of) != len(bus_rows):
            raise CaseSemanticError("duplicate bus numbers")

        def bus_index(number: float, owner: str) -> int:
            try:
                return index_of[int(number)]
            except KeyError:
                raise CaseSemanticError(
                    f"{owner} references unknown bus {int(number)}"
                ) from None

        costs = self._costs(gencost_rows, len(gen_rows))

        generators: List[Generator] = []
        gen_voltage: Dict[int, float] = {}
        for row, cost in zip(gen_rows, costs):
            if row[7] <= 0:
                continue
            bus = bus_index(row[0], "generator")
            gen_voltage.setdefault(bus, row[5])
            generators.append(
                Generator(
                    bus=bus,
                    p_min=row[9] / base_mva,
                    p_max=row[8] / base_mva,
                    q_min=row[4] / base_mva,
                    q_max=row[3] / base_mva,
                    p_setpoint=row[1] / base_mva,
                    q_setpoint=row[2] / base_mva,
                    cost=cost,
                )
            )

        buses: List[Bus] = []
        for k, row in enumerate(bus_rows):
            code = int(row[1])
            if code not in _BUS_KINDS:
                raise CaseSemanticError(
                    f"bus {int(row[0])}: unsupported bus type {code}"
                )
            kind = _BUS_KINDS[code]
            if kind is BusKind.PV and k not in gen_voltage:
                logger.debug("bus %d is PV without a generator, treating as PQ", row[0])
                kind = BusKind.PQ
            buses.append(
                Bus(
                    index=k,
                    number=int(row[0]),
                    kind=kind,
                    p_load=row[2] / base_mva,
                    q_load=row[3] / base_mva,
                    g_shunt=row[4] / base_mva,
                    b_shunt=row[5] / base_mva,
                    v_setpoint=gen_voltage.get(k, row[7]),
                    v_max=row[11],
                    v_min=row[12],
                )
            )

        branches: List[Branch] = []
        for row in branch_rows:
            if row[10] <= 0:
                continue
            branches.append(
                Branch(
                    from_bus=bus_index(row[0], "branch"),
                    to_bus=bus_index(row[1], "branch"),
                    resistance=row[2],
                    reactance=row[3],
                    total_shunt_susceptance=row[4],
                    tap_ratio=row[8] if row[8] != 0 else 1.0,
                    phase_shift=math.radians(row[9]),
                    s_max=row[5] / base_mva,
                )
            )

        case = NetworkCase(
            name=name,
            base_mva=base_mva,
            buses=tuple(buses),
            branches=tuple(branches),
            generators=tuple(generators),
        )
        validate_case(case)
        logger.debug(
            "parsed %s: %d buses, %d branches, %d generators",
            name,
            case.n_bus,
            case.n_branch,
            case.n_gen,
        )
        return case

    def parse_json(self, text: str) -> NetworkCase:
        """Parse the canonical JSON serialization"""
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise CaseSyntaxError(f"invalid case JSON: {e}") from None
        try:
            buses = tuple(
                Bus(**{**b, "kind": BusKind(b["kind"])}) for b in data["buses"]
            )
            branches = tuple(Branch(**br) for br in data["branches"])
            generators = tuple(
                Generator(**{**g, "cost": GenCost(**g["cost"])})
                for g in data["generators"]
            )
            case = NetworkCase(
                name=data["name"],
                base_mva=float(data["base_mva"]),
                buses=buses,
                branches=branches,
                generators=generators,
            )
        except (KeyError, TypeError, ValueError) as e:
            raise CaseSyntaxError(f"case JSON does not match the schema: {e}") from None
        return validate_case(case)

    def _parse_matrix(self, section: str, body: str) -> List[List[float]]:
        rows = []
        # Rows end at ';' or a newline; comments start with '%'
        lines = [re.sub(r"%.*", "", line) for line in body.splitlines()]
        for chunk in ";".join(lines).split(";"):
            values = chunk.split()
            if not values:
                continue
            try:
                rows.append([float(v) for v in values])
            except ValueError:
                raise CaseSyntaxError(
                    f"malformed matrix row in mpc.{section}: '{chunk.strip()}'"
                ) from None
        return rows

    def _check_widths(
        self, section: str, rows: Sequence[Sequence[float]], width: int
    ) -> None:
        for k, row in enumerate(rows):
            if len(row) < width:
                raise CaseSyntaxError(
                    f"malformed matrix row in mpc.{section}: row {k + 1} has "
                    f"{len(row)} columns, expected at least {width}"
                )

    def _costs(
        self, rows: Optional[Sequence[Sequence[float]]], n_gen: int
    ) -> List[GenCost]:
        if rows is None:
            logger.debug("no gencost matrix, using zero costs")
            return [GenCost() for _ in range(n_gen)]
        if len(rows) < n_gen:
            raise CaseSemanticError(
                f"gencost has {len(rows)} rows for {n_gen} generators"
            )
        self._check_widths("gencost", rows, GENCOST_COLUMNS)
        costs = []
        # Rows beyond n_gen hold reactive costs, which are not modelled
        for k, row in enumerate(rows[:n_gen]):
            if int(row[0]) != POLYNOMIAL_COST:
                raise CaseSemanticError(
                    f"gencost row {k + 1}: only polynomial costs are supported"
                )
            n_coeffs = int(row[3])
            coeffs = list(row[4 : 4 + n_coeffs])
            if len(coeffs) != n_coeffs:
                raise CaseSyntaxError(
                    f"malformed matrix row in mpc.gencost: row {k + 1} declares "
                    f"{n_coeffs} coefficients"
                )
            if n_coeffs > 3 and any(c != 0 for c in coeffs[: n_coeffs - 3]):
                raise CaseSemanticError(
                    f"gencost row {k + 1}: polynomial degree above 2"
                )
            # Highest order first
            c0, c1, c2 = (list(reversed(coeffs)) + [0.0, 0.0, 0.0])[:3]
            costs.append(GenCost(c0=c0, c1=c1, c2=c2))
        return costs


def parse_case(text: str, name: Optional[str] = None) -> NetworkCase:
    """Parse MATPOWER case text or the canonical JSON into a NetworkCase"""
    return CaseParser().parse(text, name)


def serialize_case(case: NetworkCase) -> str:
    """Canonical JSON form of a case"""
    data = dataclasses.asdict(case)
    for bus in data["buses"]:
        bus["kind"] = bus["kind"].value
    return json.dumps(data, indent=2)
