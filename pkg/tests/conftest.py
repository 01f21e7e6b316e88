import sys
from pathlib import Path

import pytest

from icmaus import compute_frequency_table, new_pattern
from icmaus.scenarios import SCENARIO_DIR, load_scenario

sys.path.insert(0, str(Path(__file__).parent))


def scenario(name):
    return load_scenario(SCENARIO_DIR / f"{name}.scn")


@pytest.fixture(scope="session")
def smoke_kb():
    return scenario("smoke").kb


@pytest.fixture(scope="session")
def smoke_table(smoke_kb):
    return compute_frequency_table(smoke_kb, new_pattern("smoke"))


@pytest.fixture(scope="session")
def grammar_kb():
    return scenario("parsing").kb


@pytest.fixture(scope="session")
def alarm_kb():
    return scenario("explaining_away_alarm").kb
