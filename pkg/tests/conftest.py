import pytest

from app.models.instance.InstanceModel import RngSeed
from app.services.graph_core import Graph, make_graph


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run desk-scale experiments")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def seed() -> RngSeed:
    return RngSeed(master=20240501)


@pytest.fixture
def triangle() -> Graph:
    return make_graph(3, [(0, 1), (1, 2), (0, 2)])


@pytest.fixture
def path4() -> Graph:
    return make_graph(4, [(0, 1), (1, 2), (2, 3)])


@pytest.fixture
def petersen() -> Graph:
    outer = [(i, (i + 1) % 5) for i in range(5)]
    spokes = [(i, i + 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    return make_graph(10, outer + spokes + inner)


@pytest.fixture
def frucht() -> Graph:
    """Cubic graph on 12 vertices with trivial automorphism group."""
    cycle = [(i, (i + 1) % 7) for i in range(7)]
    chords = [(0, 7), (1, 7), (2, 8), (3, 9), (4, 9), (5, 10), (6, 10), (7, 11), (8, 11), (8, 9), (10, 11)]
    return make_graph(12, cycle + chords)
