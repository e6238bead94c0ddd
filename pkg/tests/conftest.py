import random

import pytest

from loopperc.config import LinkConfig
from loopperc.graph import Graph

# The 4-vertex path with the 9-link configuration used as the hand-traced reference.
PATH4 = Graph.from_edges(4, [(0, 1), (1, 2), (2, 3)])
_E = {pair: k for k, pair in enumerate(PATH4.edges)}
REFERENCE_LINKS = [((1, 2), -1), ((0, 1), -1), ((2, 3), 1), ((0, 1), 1), ((2, 3), -1), ((1, 2), -1), ((1, 2), -1), ((0, 1), -1), ((2, 3), -1)]
REFERENCE = LinkConfig(tuple((_E[pair], s) for pair, s in REFERENCE_LINKS))


def random_instance(rng, max_vertices=8, max_links=10):
    while True:
        V = rng.randint(1, max_vertices)
        pairs = [(a, b) for a in range(V) for b in range(a + 1, V) if rng.random() < 0.5]
        if pairs:
            break
    g = Graph.from_edges(V, pairs)
    c = LinkConfig(tuple((rng.randrange(len(pairs)), rng.choice((1, -1))) for _ in range(rng.randint(0, max_links))))
    return g, c


@pytest.fixture
def rng():
    return random.Random(12345)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
