from pathlib import Path

import pytest

from eventprobe.captions import default_templates
from eventprobe.profiles import default_profile
from eventprobe.scene_graph import load_scene_graph

FIXTURES = Path(__file__).parent / "fixtures"
CORPUS_FILES = ("focker.json", "forrest.json", "kitchen.json")


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def profile():
    return default_profile()


@pytest.fixture(scope="session")
def templates():
    return default_templates()


@pytest.fixture(scope="session")
def corpus():
    return [load_scene_graph(str(FIXTURES / name)) for name in CORPUS_FILES]


@pytest.fixture(scope="session")
def forrest():
    return load_scene_graph(str(FIXTURES / "forrest.json"))


@pytest.fixture(scope="session")
def kitchen():
    return load_scene_graph(str(FIXTURES / "kitchen.json"))


@pytest.fixture(scope="session")
def focker():
    return load_scene_graph(str(FIXTURES / "focker.json"))
