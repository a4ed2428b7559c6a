from pathlib import Path

import pytest

from cfr.properties import derive_properties
from cfr.syntax import parse_program

DATA = Path(__file__).parent / "data"
LOOP_PATH = DATA / "loop.chc"


@pytest.fixture
def loop_path():
    return LOOP_PATH


@pytest.fixture
def loop():
    return parse_program(LOOP_PATH.read_text())


@pytest.fixture
def loop_psi(loop):
    return derive_properties(loop)
