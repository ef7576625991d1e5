import importlib.util
from pathlib import Path

import pytest

from chebrisk import Settings
from sos import IntervalSet

SCRIPT = Path(__file__).resolve().parent.parent / "scripts" / "warm_cache.py"


@pytest.fixture(scope="module")
def warm_cache():
    found = importlib.util.spec_from_file_location("warm_cache", SCRIPT)
    module = importlib.util.module_from_spec(found)
    found.loader.exec_module(module)
    return module


def test_settings_are_loaded_once(warm_cache):
    assert not hasattr(warm_cache, "load_dotenv")
    assert "load_dotenv" not in SCRIPT.read_text()


def test_targets_cover_set_and_complement(warm_cache, load_problem):
    targets = warm_cache.targets_for(load_problem("illustrative"), Settings())
    assert targets[0] == IntervalSet.single(-0.4, 0.0)
    assert len(targets) == 2
    assert targets[1].to_list() == [[-1.0, -0.4], [0.0, 1.0]]
