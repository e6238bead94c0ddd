import math

import numpy as np
import pytest

from loopperc.config import LinkConfig, Params
from loopperc.graph import Graph
from loopperc.oracle import config_code, enumerate_configs, enumeration_table
from loopperc.sampler import (
    MetropolisChain,
    SamplerConfig,
    _proposals,
    chain_seeds,
    direct_arrays,
    integrated_autocorrelation,
    log_target,
    mcmc_step,
    sample_bernoulli,
    sample_direct_theta1,
    transition_probability,
)

PATH2 = Graph.from_edges(3, [(0, 1), (1, 2)])
EDGE = Graph.from_edges(2, [(0, 1)])


def test_config_validation():
    with pytest.raises(ValueError):
        SamplerConfig(thin=0)
    with pytest.raises(ValueError):
        SamplerConfig(move_weights=(0, 1, 1, 1))


def test_direct_needs_theta_one():
    with pytest.raises(ValueError):
        sample_direct_theta1(EDGE, Params(1, 1, 2), np.random.default_rng(0))


def test_direct_reproducible():
    a = sample_direct_theta1(PATH2, Params(2, 0.5, 1), np.random.default_rng(9))
    b = sample_direct_theta1(PATH2, Params(2, 0.5, 1), np.random.default_rng(9))
    assert a == b


def test_bernoulli():
    g = Graph.from_edges(50, [(i, i + 1) for i in range(49)])
    x = np.concatenate([sample_bernoulli(g, 0.3, np.random.default_rng(k)) for k in range(100)])
    assert abs(x.mean() - 0.3) < 4 * math.sqrt(0.21 / x.size)
    with pytest.raises(ValueError):
        sample_bernoulli(g, 1.5, np.random.default_rng(0))


@pytest.mark.parametrize("theta,u", [(0.5, 0.3), (2.0, 1.0), (1.0, 0.5), (3.0, 0.0)])
def test_detailed_balance(theta, u):
    p = Params(0.7, u, theta)
    table = enumeration_table(PATH2, 2)
    states = [table.config(k) for k in range(table.size)]
    checked = 0
    for x in states:
        if log_target(x, PATH2, p) == -math.inf:
            continue
        for y, _, _ in _proposals(x, PATH2, p, np.ones(4)):
            if y == x or log_target(y, PATH2, p) == -math.inf:
                continue
            lhs = math.exp(log_target(x, PATH2, p)) * transition_probability(x, y, PATH2, p)
            rhs = math.exp(log_target(y, PATH2, p)) * transition_probability(y, x, PATH2, p)
            assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-300)
            checked += 1
    assert checked >= 20


def test_reference_step_stays_valid():
    rng = np.random.default_rng(1)
    s = LinkConfig()
    for _ in range(500):
        s = mcmc_step(s, PATH2, Params(1.0, 0.5, 2.0), rng)
        s.validate(PATH2)


def test_chain_reproducible_and_seeded():
    p = Params(0.3, 0.3, 2.0)
    a = MetropolisChain(PATH2, p, SamplerConfig(seed=4, burn_in=50)).record(200)
    b = MetropolisChain(PATH2, p, SamplerConfig(seed=4, burn_in=50)).record(200)
    c = MetropolisChain(PATH2, p, SamplerConfig(seed=5, burn_in=50)).record(200)
    assert all(np.array_equal(a[k], b[k]) for k in a)
    assert not np.array_equal(a["code"], c["code"])


def test_chain_record_consistent_with_state():
    p = Params(0.5, 0.5, 0.5)
    chain = MetropolisChain(PATH2, p, SamplerConfig(seed=2, burn_in=10, thin=1))
    r = chain.record(5)
    s = chain.state
    assert r["code"][-1] == config_code(s, PATH2) and r["n"][-1] == s.n
    assert chain.sweep_length == PATH2.edge_count
    rates = chain.stats.acceptance_rates()
    assert set(rates) == {"insert", "delete", "sign_flip", "adjacent_swap"}


def test_chain_length_distribution_on_edge():
    p = Params(0.5, 1.0, 2.0)
    dist = enumerate_configs(EDGE, p, 10)
    exact = np.bincount(dist.table.n, weights=dist.probabilities)
    r = MetropolisChain(EDGE, p, SamplerConfig(seed=8, burn_in=100, thin=2)).record(50_000)
    emp = np.bincount(r["n"], minlength=exact.size)[: exact.size] / r["n"].size
    assert np.abs(emp - exact).max() < 0.01


def test_chain_seeds_distinct():
    s = chain_seeds(7, 4)
    assert len(set(s)) == 4 and s == chain_seeds(7, 4)


def test_bernoulli_extremes():
    g = Graph.from_edges(4, [(0, 1), (1, 2), (2, 3)])
    assert not sample_bernoulli(g, 0.0, np.random.default_rng(0)).any()
    assert sample_bernoulli(g, 1.0, np.random.default_rng(0)).all()


def test_direct_sampler_total_variation():
    from loopperc import _kernels

    p = Params(0.3, 0.5, 1.0)
    dist = enumerate_configs(PATH2, p, 8)
    codes = dist.table.codes()
    index = {int(c): k for k, c in enumerate(codes)}
    rng = np.random.default_rng(21)
    N = 10**6
    counts = np.zeros(codes.size + 1)
    base = 2 * PATH2.edge_count + 1
    for _ in range(N):
        e, s = direct_arrays(PATH2, p, rng)
        counts[index.get(int(_kernels.config_code(e, s, e.size, base)), codes.size)] += 1
    emp = counts / N
    tv = 0.5 * (np.abs(emp[:-1] - dist.probabilities).sum() + emp[-1])
    assert tv <= 0.005


def test_autocorrelation_time():
    rng = np.random.default_rng(0)
    assert integrated_autocorrelation(rng.standard_normal(20000)) == pytest.approx(1.0, abs=0.15)
    a = 0.8
    x = np.zeros(50000)
    noise = rng.standard_normal(x.size)
    for t in range(1, x.size):
        x[t] = a * x[t - 1] + noise[t]
    assert integrated_autocorrelation(x) == pytest.approx((1 + a) / (1 - a), rel=0.15)
