import itertools
import math

import numpy as np
import pytest

from loopperc.config import Params
from loopperc.domination import (
    CouplingError,
    DeltaInputs,
    build_coupling,
    delta,
    event_probabilities,
    f_helper,
    product_law,
    theorem2_condition,
    theorem2_threshold,
    up_sets,
    verify_theorem1_exact,
)
from loopperc.graph import Graph


def test_delta_properties():
    grid = itertools.product((0.1, 0.5, 2.0), (0.2, 1.0), (0.5, 1.0, 3.0), (1, 4))
    for b, u, th, K in grid:
        d = delta(DeltaInputs(b, u, th, K))
        assert 0 < d < 1
        assert delta(DeltaInputs(b, u, 1 / th, K)) == pytest.approx(d)
        assert delta(DeltaInputs(b, u, th, K), "theorem_statement") >= d
        assert delta(DeltaInputs(b, u, th, K + 1)) < d
    assert delta(DeltaInputs(0.5, 1, 1, 4)) == delta(DeltaInputs(0.5, 1, 1, 4), "theorem_statement")
    with pytest.raises(ValueError):
        DeltaInputs(0.5, 1, 1, 0)
    with pytest.raises(ValueError):
        delta(DeltaInputs(0.5, 1, 1, 2), "other")


def test_delta_closed_form_at_theta_one():
    b, u, K = 0.7, 0.6, 2
    expect = 0.5 * (u / K) ** 2 * b / (b + 3 * 4 ** (K + 1)) * (b / math.expm1(b)) ** (2 * K - 1)
    assert delta(DeltaInputs(b, u, 1.0, K)) == pytest.approx(expect, rel=1e-14)
    assert f_helper(b, K) == pytest.approx((b / math.expm1(b)) ** -(2 * K - 1))


def test_threshold():
    t = theorem2_threshold(1.0, 4, 0.5)
    assert t > math.log(2)
    assert theorem2_condition(t * 0.999, 1.0, 4, 0.5)
    assert not theorem2_condition(t * 1.001, 1.0, 4, 0.5)
    assert theorem2_condition(0.5, 1.0, 4, 0.5)


def test_coupling_of_independent_bits():
    px, py = [0.7, 0.5, 0.9], [0.4, 0.5, 0.1]
    t = build_coupling(lambda k, a: px[k - 1], lambda k, b: py[k - 1], 3)
    assert t.dominance_holds()
    mx = t.marginal_x()
    assert mx[(1, 0, 1)] == pytest.approx(0.7 * 0.5 * 0.9)
    assert sum(t.joint.values()) == pytest.approx(1)


def test_coupling_refuses_incompatible():
    with pytest.raises(CouplingError):
        build_coupling(lambda k, a: 0.2, lambda k, b: 0.5, 2)
    # same-prefix comparison passes here, yet X does not dominate Y
    cx = lambda k, a: 0.5 if k == 1 else (1.0 if a == (0,) else 0.0)
    cy = lambda k, b: 0.4 if k == 1 else (1.0 if b == (0,) else 0.0)
    with pytest.raises(CouplingError):
        build_coupling(cx, cy, 2)


def test_up_sets():
    assert len(up_sets(1)) == 3
    assert len(up_sets(2)) == 6
    assert len(up_sets(3)) == 20
    law = {(0, 0): 0.25, (0, 1): 0.25, (1, 0): 0.25, (1, 1): 0.25}
    probs = event_probabilities(law, up_sets(2), 2)
    assert probs.min() == 0 and probs.max() == 1


def test_product_law_sums_to_one():
    law = product_law(lambda k, a: 0.3 + 0.1 * sum(a), 3)
    assert sum(law.values()) == pytest.approx(1)


def test_exact_verification_on_edge():
    g = Graph.from_edges(2, [(0, 1)])
    r = verify_theorem1_exact(g, 0, Params(0.25, 1.0, 2.0), 12)
    assert r.verdict == "verified" and r.patterns_checked == 1
    assert r.min_lower >= r.delta and r.gap > 0
    assert r.truncation_bound < 1e-10
    assert set(r.to_dict()) >= {"min_conditional", "delta", "verdict"}


def test_delta_edge_cases():
    for v in ("proof", "theorem_statement"):
        assert delta(DeltaInputs(0.5, 0.0, 2.0, 3), v) == 0


def test_delta_high_precision_at_theta_one():
    import mpmath

    mpmath.mp.dps = 50
    for b, u, K in ((0.25, 1.0, 6), (1.3, 0.4, 2), (0.01, 0.9, 4)):
        B = mpmath.mpf(b)
        exact = mpmath.mpf(0.5) * (mpmath.mpf(u) / K) ** 2 * B / (B + 3 * 4 ** (K + 1)) * (B / mpmath.expm1(B)) ** (2 * K - 1)
        for v in ("proof", "theorem_statement"):
            assert delta(DeltaInputs(b, u, 1.0, K), v) == pytest.approx(float(exact), rel=1e-13)


def test_f_helper_examples():
    assert f_helper(0.5, 0) == pytest.approx(0.5 / math.expm1(0.5))
    assert f_helper(1e-9, 5) == pytest.approx(1.0)
    assert f_helper(0.5, 6) == pytest.approx((math.expm1(0.5) / 0.5) ** 11)
    assert f_helper(0.5, 6) * delta(DeltaInputs(0.25, 1, 2, 6)) == pytest.approx(
        0.5 * (0.5 / 6) ** 2 * (0.25 / 8) / (0.25 / 8 + 3 * 4**7)
    )


def test_condition_without_delta():
    for b in (0.3, 0.69, 0.7, 1.0):
        assert theorem2_condition(b, 0.0, 4, 0.5) == (-math.expm1(-b) < 0.5)


def test_coupling_single_bit_and_diagonal():
    t = build_coupling(lambda k, a: 0.7, lambda k, b: 0.2, 1)
    assert t.joint == pytest.approx({((1,), (1,)): 0.2, ((1,), (0,)): 0.5, ((0,), (0,)): 0.3})
    cond = lambda k, a: 0.2 + 0.3 * sum(a)
    t = build_coupling(cond, cond, 3)
    assert all(x == y for (x, y), q in t.joint.items() if q > 0)
