import csv
import io
import json
import math

import numpy as np
import pytest

from blockenc.costs import method_costs
from blockenc.report import (ComparisonRow, RegimePoint, boundaries_csv, comparison_csv,
                             comparison_table, efficiency_ratios, merit_crossover,
                             regime_boundaries, regime_csv, regime_map, sidecar, table1,
                             table1_csv, tie_x, write_outputs)


def test_merit_invariant():
    with pytest.raises(ValueError):
        ComparisonRow("x", 1e-3, 100.0, 0.5, 100.0)


def test_comparison_table_shape_and_recomputation():
    grid = np.logspace(-2, -20, 50)
    rows = comparison_table(grid)
    assert len(rows) == 250
    costs = {c.method: c for c in method_costs()}
    for r in rows:
        assert r.figure_of_merit == costs[r.method].t_count(r.eps) / costs[r.method].alpha
    with pytest.raises(ValueError):
        comparison_table([])


def test_efficiency_ratios_at_1e10():
    r = efficiency_ratios(1e-10)
    assert r["qrom"] == pytest.approx(3.16, abs=0.01)
    assert r["unary"] == pytest.approx(22.76, abs=0.01)
    assert r["sfable"] == pytest.approx(77.24, abs=0.01)
    # with these cost constants sub-opt does not beat gate-opt at 1e-10
    assert r["sub_opt"] == pytest.approx(1.0389, abs=1e-4)


def test_crossover_from_cost_constants():
    eps = merit_crossover("gate_opt", "sub_opt")
    assert eps == pytest.approx(1.606e-7, rel=1e-3)
    costs = {c.method: c for c in method_costs()}
    assert costs["gate_opt"].merit(eps) == pytest.approx(costs["sub_opt"].merit(eps))


def test_regime_examples():
    pts = regime_map([0.0, 1e6], [1e-10])
    assert [p.winner for p in pts] == ["gate_opt", "qrom"]
    with pytest.raises(ValueError):
        regime_map([], [1e-10])


def test_regime_winner_minimizes_and_is_monotone():
    costs = {c.method: c for c in method_costs()}
    xs = np.linspace(0, 2e5, 81)
    for eps in (1e-3, 1e-8, 1e-15):
        pts = regime_map(xs, [eps])
        seen_qrom = False
        for p in pts:
            scores = {m: (costs[m].a * p.log2_inv_eps + costs[m].b + p.x) / costs[m].alpha
                      for m in ("qrom", "gate_opt", "sub_opt")}
            assert p.winner == min(scores, key=scores.get)
            if seen_qrom:
                assert p.winner == "qrom"
            seen_qrom |= p.winner == "qrom"


def test_tie_solves_linear_equation():
    costs = {c.method: c for c in method_costs()}
    L = math.log2(1e10)
    x = tie_x("gate_opt", "sub_opt", L)
    g, s = costs["gate_opt"], costs["sub_opt"]
    assert (g.a * L + g.b + x) / g.alpha == pytest.approx((s.a * L + s.b + x) / s.alpha)
    assert tie_x("unary", "qrom", L) is None


def test_boundaries_sample_200_points():
    lines = regime_boundaries()
    assert set(lines) == {"qrom|gate_opt", "qrom|sub_opt", "gate_opt|sub_opt"}
    assert all(len(v) <= 200 for v in lines.values())
    assert lines["qrom|sub_opt"] and lines["gate_opt|sub_opt"]
    for L, x in lines["gate_opt|sub_opt"]:
        pts = regime_map([x * 0.9, x * 1.1], [2.0 ** -L])
        assert {p.winner for p in pts} == {"gate_opt", "sub_opt"}


def test_csv_columns():
    rows = comparison_table([1e-10])
    assert comparison_csv(rows).splitlines()[0] == "method,eps,t_count,alpha,merit"
    assert regime_csv([RegimePoint(0.0, 1.0, "qrom")]).splitlines()[0] == "x,log2_inv_eps,winner"
    t = table1_csv(table1())
    assert t.splitlines()[0] == "method,bound_a,bound_b,avg_a,avg_b"
    parsed = list(csv.reader(io.StringIO(t)))
    assert parsed[1][0] == "unary" and parsed[1][3] == ""
    assert boundaries_csv({"a|b": [(1.0, 2.0)]}).splitlines()[1] == "a|b,1.0,2.0"


def test_write_outputs_with_sidecar(tmp_path):
    meta = sidecar(seed=42, grid={"min": 1e-20})
    paths = write_outputs(tmp_path, {"x.csv": "a\n"}, meta)
    assert [p.name for p in paths] == ["x.csv", "metadata.json"]
    loaded = json.loads((tmp_path / "metadata.json").read_text())
    assert loaded["seed"] == 42 and "gate_opt" in loaded["methods"]
