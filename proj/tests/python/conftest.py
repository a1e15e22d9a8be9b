import json
import os
from pathlib import Path

import pytest

SCENARIOS = Path(os.environ.get("DISTOBS_SCENARIO_DIR", Path(__file__).resolve().parents[2] / "scenarios"))


@pytest.fixture
def scenario_dir():
    return SCENARIOS


@pytest.fixture
def load():
    def _load(name):
        return json.loads((SCENARIOS / name).read_text())

    return _load
