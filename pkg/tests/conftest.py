import sys

import numpy as np
import pytest

from idq import InfluenceDiagram
from idq.kernels import available, use_backend

B = ["0", "1"]


def chain():
    """1 -> 2 -> 3, binary, with the textbook Bayes numbers."""
    d = InfluenceDiagram()
    d.add_node(1, B, (), [0.3, 0.7])
    d.add_node(2, B, (1,), [[0.8, 0.2], [0.1, 0.9]])
    d.add_node(3, B, (2,), [[0.9, 0.1], [0.2, 0.8]])
    return d


def pair():
    d = InfluenceDiagram()
    d.add_node(1, B, (), [0.3, 0.7])
    d.add_node(2, B, (1,), [[0.8, 0.2], [0.1, 0.9]])
    return d


def topo_diagram(topo, card=2):
    """Uniform-table diagram on a topology; tables are valid but uninformative."""
    d = InfluenceDiagram()
    for i, ps in topo.items():
        shape = (card,) * (len(ps) + 1)
        d.add_node(i, [str(k) for k in range(card)], ps, np.full(shape, 1.0 / card))
    return d


CHAIN = {1: (), 2: (1,), 3: (2,)}
DIAMOND = {1: (), 2: (1,), 3: (1,), 4: (2, 3)}
DIVERGING = {1: (), 2: (1,), 3: (1,)}


@pytest.fixture
def chain_d():
    return chain()


@pytest.fixture
def pair_d():
    return pair()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(params=available())
def backend(request):
    prev = use_backend(request.param)
    yield request.param
    use_backend(prev)


def pytest_terminal_summary(terminalreporter):
    """Repeat the acceptance PASS/FAIL lines after the run."""
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    lines = getattr(mod, "REPORT", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
