import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blockenc.costs import (CostExpr, ErrorBudget, SFableCost, UnboundedAllocation,
                            collapse_to_single_eps, constant_cost, method_cost, method_costs,
                            optimize_budget, price_rotation)


def test_rotation_atoms():
    r = price_rotation()
    assert (r.slope, r.constant) == (1.15, 9.2)
    c = price_rotation(controlled=True)
    assert c.slope == pytest.approx(2.3) and c.constant == pytest.approx(20.7)


def test_cost_algebra():
    a = price_rotation(label="x") + price_rotation(label="y") + constant_cost(5)
    assert a.labels == ("x", "y") and a.constant == pytest.approx(23.4)
    assert (2 * a).coef("x") == pytest.approx(2.3)
    assert a.relabel("z").terms == ((pytest.approx(2.3), "z"),)
    assert a.evaluate({"x": 0.5, "y": 0.25}) == pytest.approx(23.4 + 1.15 + 2.3)
    with pytest.raises(ValueError):
        CostExpr(((1.0, "x"), (2.0, "x")))
    with pytest.raises(ValueError):
        CostExpr(((-1.0, "x"),))


def test_optimizer_closed_form():
    cost = CostExpr(((6.9, "a"), (2.3, "b")), 0.0)
    bud = optimize_budget(cost, {"a": 1.0, "b": 2.0}, 1e-6)
    assert bud.allocations["a"] / bud.allocations["b"] == pytest.approx(6.0)
    assert bud.bound() == pytest.approx(1e-6)


def test_optimizer_errors():
    cost = CostExpr(((1.0, "a"),), 0.0)
    with pytest.raises(UnboundedAllocation):
        optimize_budget(cost, {}, 1e-3)
    with pytest.raises(UnboundedAllocation):
        optimize_budget(cost, {"a": 0.0}, 1e-3)
    with pytest.raises(ValueError):
        optimize_budget(cost, {"a": 1.0}, 0.0)
    with pytest.raises(ValueError):
        ErrorBudget({"a": -1.0}, 1.0)


@given(st.lists(st.tuples(st.floats(0.1, 20), st.floats(0.1, 100)), min_size=2, max_size=5),
       st.floats(1e-12, 1e-2), st.integers(0, 2 ** 31 - 1))
@settings(max_examples=200, deadline=None)
def test_optimizer_is_optimal(terms, eps, seed):
    labels = [f"e{k}" for k in range(len(terms))]
    cost = CostExpr(tuple((a, lbl) for (a, _), lbl in zip(terms, labels)), 0.0)
    sens = {lbl: c for (_, c), lbl in zip(terms, labels)}
    bud = optimize_budget(cost, sens, eps)
    assert bud.bound() == pytest.approx(eps, rel=1e-9)
    best = cost.evaluate(bud.allocations)
    # random feasible allocations never do better
    rng = np.random.default_rng(seed)
    for _ in range(20):
        w = rng.dirichlet(np.ones(len(labels)))
        alt = {lbl: w[k] * eps / sens[lbl] for k, lbl in enumerate(labels)}
        assert cost.evaluate(alt) >= best - 1e-9


def test_collapse_is_exact():
    cost = CostExpr(((2.0, "a"), (3.0, "b")), 7.0)
    bud = optimize_budget(cost, {"a": 1.0, "b": 4.0}, 1e-5)
    a, b = collapse_to_single_eps(cost, bud)
    assert a == 5.0
    assert a * math.log2(1e5) + b == pytest.approx(cost.evaluate(bud.allocations))


def test_sfable_piecewise():
    c = SFableCost(high=(1.0, 2.0, 3.0, 4.0), low=(10.0, 5.0), boundary=1e-3)
    assert c.evaluate(0.5) == pytest.approx((1 + 2) * (3 + 4))
    assert c.evaluate(1e-4) == pytest.approx(10 * math.log2(1e4) + 5)
    with pytest.raises(ValueError):
        c.affine(0.5)


def test_method_costs_table():
    rows = {c.method: c for c in method_costs()}
    assert list(rows) == ["unary", "qrom", "sfable", "gate_opt", "sub_opt"]
    assert rows["unary"].a == pytest.approx(1490.4) and rows["unary"].b == pytest.approx(22367.17, abs=0.01)
    assert rows["qrom"].a == pytest.approx(27.6) and rows["qrom"].b == pytest.approx(9061.84, abs=0.01)
    assert rows["gate_opt"].t_count(1e-10) == pytest.approx(786.5, abs=0.1)
    assert method_cost("sub_opt") is rows["sub_opt"]
    with pytest.raises(KeyError):
        method_cost("nope")
