"""Bundled IEEE test cases and case loading by name or path"""

import logging
from importlib import resources
from pathlib import Path
from typing import Callable, Dict, Union

from .case import NetworkCase
from .parser import CaseParser

logger = logging.getLogger(__name__)


def _case5() -> NetworkCase:
    text = resources.files(__package__).joinpath("data/case5.m").read_text()
    return CaseParser().parse_matpower(text, "case5")


def _pypower_case(name: str) -> Callable[[], NetworkCase]:
    def load() -> NetworkCase:
        import pypower.api

        ppc = getattr(pypower.api, name)()
        return CaseParser().from_ppc(ppc, name)

    return load


BUNDLED_CASES: Dict[str, Callable[[], NetworkCase]] = {
    "case5": _case5,
    "case57": _pypower_case("case57"),
    "case118": _pypower_case("case118"),
}


def load_case(name_or_path: Union[str, Path]) -> NetworkCase:
    """Load a bundled case by name, or a MATPOWER/JSON case file by path

    Raises:
        FileNotFoundError: if the argument is neither a bundled name nor a file
    """
    key = str(name_or_path)
    if key in BUNDLED_CASES:
        case = BUNDLED_CASES[key]()
    else:
        path = Path(name_or_path)
        if not path.is_file():
            raise FileNotFoundError(f"case file not found: {path}")
        case = CaseParser().parse(path.read_text(), path.stem)
    logger.info(
        "loaded %s: %d buses, %d branches, %d generators",
        case.name,
        case.n_bus,
        case.n_branch,
        case.n_gen,
    )
    return case
