"""Optimality gaps against bundled reference OPF objectives"""

import math
from pathlib import Path
from typing import Dict, Mapping, Optional, Sequence, Union

import pandas as pd

from .ddcr import SHORTFALL_TOL_MW
from .solver import OpfSolution

# Published optimal objectives ($/hr). ACOPF is the gap reference; the other
# columns are kept for side-by-side reporting. SDPOPF is not solved here.
REFERENCE_OBJECTIVES: Dict[str, Dict[str, float]] = {
    "case5": {
        "ACOPF": 17551.89,
        "DDCR": 17547.4,
        "DCOPF": 17479.9,
        "SDPOPF": 16635.78,
    },
    "case57": {
        "ACOPF": 12100.86,
        "DDCR": 12096.04,
        "DCOPF": 10211.99,
        "SDPOPF": 10458.06,
    },
    "case118": {
        "ACOPF": 129660.70,
        "DDCR": 129680.13,
        "DCOPF": 125947.88,
        "SDPOPF": 129713.07,
    },
}

GAP_COLUMNS = [
    "case",
    "method",
    "status",
    "objective",
    "reference_acopf",
    "published",
    "gap",
    "gap_pct",
    "note",
]


def relative_gap(value: float, reference: float) -> float:
    """(value - reference) / reference"""
    if reference == 0:
        raise ValueError("reference objective must be non-zero")
    return (value - reference) / reference


def gap_report(
    solutions: Sequence[OpfSolution],
    references: Mapping[str, Mapping[str, float]] = REFERENCE_OBJECTIVES,
) -> pd.DataFrame:
    """Signed relative gap of every solution against its case's ACOPF reference

    Solutions for cases without a reference get a NaN gap and a note.
    ``gap_vs_reference`` is filled in on each solution that has one.
    """
    rows = []
    for solution in solutions:
        case_refs = references.get(solution.case_name, {})
        reference: Optional[float] = case_refs.get("ACOPF")
        notes = []
        gap = math.nan
        if reference is None:
            notes.append(f"no bundled reference for {solution.case_name}")
        elif not math.isfinite(solution.objective):
            notes.append(f"no objective ({solution.status.value})")
        else:
            gap = relative_gap(solution.objective, reference)
            solution.gap_vs_reference = gap
        shortfall = solution.diagnostics.get("balance_shortfall_mw", 0.0)
        if shortfall > SHORTFALL_TOL_MW:
            notes.append(f"dispatch {shortfall:.1f} MW below load")
        if case_refs and "SDPOPF" in case_refs:
            notes.append("SDPOPF column omitted (not solved)")
        rows.append(
            {
                "case": solution.case_name,
                "method": solution.method,
                "status": solution.status.value,
                "objective": solution.objective,
                "reference_acopf": math.nan if reference is None else reference,
                "published": case_refs.get(solution.method, math.nan),
                "gap": gap,
                "gap_pct": gap * 100,
                "note": "; ".join(notes),
            }
        )
    return pd.DataFrame(rows, columns=GAP_COLUMNS)


def write_gap_report(frame: pd.DataFrame, path: Union[str, Path]) -> Path:
    path = Path(path)
    frame.to_csv(path, index=False, float_format="%.10g")
    return path
