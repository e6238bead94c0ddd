import math

import pytest

from loopperc.config import CROSS, DOUBLE_BAR, LinkConfig, Params, edge_counts, log_weight, log_weight_odds, restrict
from loopperc.graph import Graph


def test_params_validation_and_constants():
    p = Params(0.5, 1.0, 0.25)
    assert p.theta_hat == 4 and p.theta_check == 0.25 and p.beta_plus == 2.0
    for bad in ((0, 0.5, 1), (1, 1.5, 1), (1, 0.5, 0)):
        with pytest.raises(ValueError):
            Params(*bad)


def test_link_config_basics():
    c = LinkConfig.from_pairs([(0, 1), (2, -1), (0, 1)])
    assert c.n == 3 and c.n_cross == 2 and c.n_bar == 1
    assert c.insert(1, 1, DOUBLE_BAR).links == ((0, 1), (1, -1), (2, -1), (0, 1))
    assert c.delete(0).links == ((2, -1), (0, 1))
    assert LinkConfig.from_json(c.to_json()) == c
    assert LinkConfig.from_arrays(c.edge_indices, c.signs) == c
    with pytest.raises(ValueError):
        LinkConfig(((0, 2),))
    with pytest.raises(IndexError):
        c.validate(Graph.from_edges(2, [(0, 1)]))


def test_restrict_and_counts():
    g = Graph.from_edges(4, [(0, 1), (1, 2), (2, 3)])
    c = LinkConfig.from_pairs([(0, 1), (2, -1), (1, 1), (0, -1)])
    assert restrict(c, {0, 1}).links == ((0, 1), (1, 1), (0, -1))
    assert edge_counts(c, g).tolist() == [2, 1, 1]


def test_log_weight():
    p = Params(0.3, 0.4, 2.0)
    c = LinkConfig.from_pairs([(0, CROSS), (1, DOUBLE_BAR), (0, CROSS)])
    expect = 0.3**3 / 6 * 0.4**2 * 0.6 * 2.0**5
    assert math.isclose(math.exp(log_weight(c, p, 5)), expect)
    assert log_weight(LinkConfig(((0, DOUBLE_BAR),)), Params(0.3, 1.0, 1.0), 1) == -math.inf
    assert log_weight(LinkConfig(), p, 3) == pytest.approx(3 * math.log(2))


def test_odds_form_agrees_at_fixed_length():
    p = Params(0.7, 0.3, 1.5)
    a = LinkConfig.from_pairs([(0, 1), (1, 1), (0, -1)])
    b = LinkConfig.from_pairs([(1, -1), (1, -1), (0, -1)])
    diff = log_weight(a, p, 2) - log_weight(b, p, 4)
    assert log_weight_odds(a, p, 2) - log_weight_odds(b, p, 4) == pytest.approx(diff)
    with pytest.raises(ValueError):
        log_weight_odds(a, Params(0.7, 1.0, 1.0), 2)
