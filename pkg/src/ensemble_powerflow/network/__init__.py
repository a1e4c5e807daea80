"""Network data model, case codecs and admittance matrices"""

from .admittance import build_admittance, build_branch_matrices
from .bundled import BUNDLED_CASES, load_case
from .case import Branch, Bus, BusKind, GenCost, Generator, NetworkCase, validate_case
from .parser import CaseParser, parse_case, serialize_case

__all__ = [
    "BUNDLED_CASES",
    "Branch",
    "Bus",
    "BusKind",
    "CaseParser",
    "GenCost",
    "Generator",
    "NetworkCase",
    "build_admittance",
    "build_branch_matrices",
    "load_case",
    "parse_case",
    "serialize_case",
    "validate_case",
]
