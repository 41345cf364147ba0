import pytest

from iolw5gsim.cli import default_scenario_path
from iolw5gsim.config import load_scenario_file


@pytest.fixture(scope="session")
def default_scenario():
    return load_scenario_file(default_scenario_path())


@pytest.fixture(scope="session")
def default_config_text():
    return default_scenario_path().read_text()
