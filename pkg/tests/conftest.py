from pathlib import Path

import pytest

from ensemble_powerflow.network import load_case, parse_case
from ensemble_powerflow.sampling import SamplerConfig, generate, split

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def fixtures_dir():
    return FIXTURES


@pytest.fixture
def two_bus_case():
    """Slack bus feeding a 0.5 p.u. load over a lossless j0.1 line"""
    return parse_case((FIXTURES / "two_bus.json").read_text())


@pytest.fixture(scope="session")
def case5():
    return load_case("case5")


@pytest.fixture(scope="session")
def case5_sampler():
    return SamplerConfig(n_samples=40, seed=3)


@pytest.fixture(scope="session")
def case5_dataset(case5, case5_sampler):
    return generate(case5, case5_sampler)


@pytest.fixture(scope="session")
def case5_split(case5_dataset, case5_sampler):
    return split(case5_dataset, case5_sampler)
