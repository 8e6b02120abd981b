"""T-count cost model.

Costs are affine in ``log2(1/eps_i)`` per error source::

    T = sum_i a_i * log2(1/eps_i) + b

with the rotation-synthesis atoms ``1.15 log2(1/eps) + 9.2`` (single-qubit
rotation) and ``2.3 log2(1/eps) + 20.7`` (controlled rotation).  Budgets
split a total error across sources by minimizing ``T`` under a linear error
constraint ``sum_i c_i eps_i = eps``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

ROT_SLOPE = 1.15
ROT_CONST = 9.2
T_PER_TOFFOLI_PAIR = 4
T_PER_CONTROLLED_H = 2


@dataclass(frozen=True)
class CostExpr:
    terms: tuple[tuple[float, str], ...] = ()
    constant: float = 0.0

    def __post_init__(self):
        labels = [lbl for _, lbl in self.terms]
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate labels in {labels}")
        if any(a < 0 for a, _ in self.terms):
            raise ValueError("negative log coefficient")

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(lbl for _, lbl in self.terms)

    @property
    def slope(self) -> float:
        return sum(a for a, _ in self.terms)

    def coef(self, label: str) -> float:
        return dict((lbl, a) for a, lbl in self.terms).get(label, 0.0)

    def __add__(self, other: "CostExpr") -> "CostExpr":
        merged: dict[str, float] = {}
        for a, lbl in self.terms + other.terms:
            merged[lbl] = merged.get(lbl, 0.0) + a
        return CostExpr(tuple((a, lbl) for lbl, a in merged.items()),
                        self.constant + other.constant)

    def __mul__(self, k: float) -> "CostExpr":
        return CostExpr(tuple((k * a, lbl) for a, lbl in self.terms), k * self.constant)

    __rmul__ = __mul__

    def relabel(self, label: str) -> "CostExpr":
        """Collapse every term onto a single source."""
        if not self.terms:
            return self
        return CostExpr(((self.slope, label),), self.constant)

    def evaluate(self, eps) -> float:
        """T-count at ``eps`` (a float shared by all sources, or a label map)."""
        total = self.constant
        for a, lbl in self.terms:
            e = eps[lbl] if isinstance(eps, Mapping) else eps
            total += a * math.log2(1.0 / e)
        return total


def constant_cost(t: float) -> CostExpr:
    return CostExpr((), float(t))


def price_rotation(controlled: bool = False, label: str = "rot") -> CostExpr:
    """Cost of one ``eps``-approximate rotation.

    A controlled rotation is two uncontrolled halves at ``eps/2`` each:
    ``2 (1.15 log2(2/eps) + 9.2) = 2.3 log2(1/eps) + 20.7``.
    """
    if controlled:
        return CostExpr(((2 * ROT_SLOPE, label),), 2 * (ROT_SLOPE * 1.0 + ROT_CONST))
    return CostExpr(((ROT_SLOPE, label),), ROT_CONST)


@dataclass(frozen=True)
class ErrorBudget:
    allocations: Mapping[str, float]
    total_bound: float
    sensitivity: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if any(e <= 0 for e in self.allocations.values()):
            raise ValueError("allocations must be positive")

    def bound(self) -> float:
        return sum(self.sensitivity[k] * e for k, e in self.allocations.items())

    def ratios(self, reference: str | None = None) -> dict[str, float]:
        """Allocations divided by the one for ``reference`` (or by the smallest)."""
        ref = self.allocations[reference] if reference else min(self.allocations.values())
        return {k: e / ref for k, e in self.allocations.items()}

    def scale(self, ratios: Mapping[str, float]) -> float:
        """``lambda`` such that ``eps_i = ratio_i * total / lambda``."""
        k = next(iter(ratios))
        return ratios[k] * self.total_bound / self.allocations[k]


class UnboundedAllocation(ValueError):
    """A cost term has no matching error sensitivity."""


def optimize_budget(cost: CostExpr, sensitivity: Mapping[str, float],
                    eps_total: float) -> ErrorBudget:
    """Minimize ``cost`` subject to ``sum_i c_i eps_i = eps_total``.

    Stationarity of ``sum_i a_i log2(1/eps_i) + mu (sum_i c_i eps_i - eps)``
    gives ``eps_i = a_i / (mu' c_i)``; the constraint fixes
    ``eps_i = (a_i / c_i) * eps_total / sum_j a_j``.
    """
    if eps_total <= 0:
        raise ValueError("eps_total must be positive")
    missing = set(cost.labels) - set(sensitivity)
    if missing:
        raise UnboundedAllocation(f"no sensitivity for {sorted(missing)}")
    slope = cost.slope
    alloc = {}
    for a, lbl in cost.terms:
        c = sensitivity[lbl]
        if c <= 0:
            raise UnboundedAllocation(f"zero sensitivity for {lbl!r} with coefficient {a}")
        alloc[lbl] = (a / c) * eps_total / slope
    return ErrorBudget(alloc, eps_total, {k: sensitivity[k] for k in alloc})


def collapse_to_single_eps(cost: CostExpr, budget: ErrorBudget) -> tuple[float, float]:
    """Rewrite a multi-source cost as ``a log2(1/eps) + b`` under ``budget``."""
    b = cost.constant
    for a, lbl in cost.terms:
        r = budget.allocations[lbl] / budget.total_bound
        b += a * math.log2(1.0 / r)
    return cost.slope, b


@dataclass(frozen=True)
class SFableCost:
    """Regime-dependent S-FABLE cost.

    Above ``boundary`` only part of the transformed rotations survive and
    the count grows with accuracy, giving a product form; below it every
    rotation is kept and the cost is affine.
    """
    high: tuple[float, float, float, float]  # (k_a, k_b, r_a, r_b)
    low: tuple[float, float]
    boundary: float = 7.08e-4

    def evaluate(self, eps: float) -> float:
        L = math.log2(1.0 / eps)
        if eps > self.boundary:
            ka, kb, ra, rb = self.high
            return (ka * L + kb) * (ra * L + rb)
        a, b = self.low
        return a * L + b

    def affine(self, eps: float) -> tuple[float, float]:
        if eps > self.boundary:
            raise ValueError("high-eps branch is not affine")
        return self.low


# -- headline formulas ------------------------------------------------------

@dataclass(frozen=True)
class MethodCost:
    """One upper-bound row: ``T(eps) = a log2(1/eps) + b`` and subnormalization."""
    method: str
    a: float
    b: float
    alpha: float
    piecewise: SFableCost | None = None

    def t_count(self, eps: float) -> float:
        if self.piecewise is not None:
            return self.piecewise.evaluate(eps)
        return self.a * math.log2(1.0 / eps) + self.b

    def merit(self, eps: float) -> float:
        return self.t_count(eps) / self.alpha


METHOD_ORDER = ("unary", "qrom", "sfable", "gate_opt", "sub_opt")
_METHOD_COSTS: dict[int, tuple[MethodCost, ...]] = {}


def method_costs(bundle=None) -> tuple[MethodCost, ...]:
    """Upper-bound cost rows for all five encodings, rebuilt from the builders.

    Unstructured rows come from structural counts (Toffoli pairs, rotation
    counts, error factors); the algebraic rows collapse the optimized
    budgets.  Each ``alpha`` is the measured subnormalization.
    """
    from .algebraic import (build_gate_optimized, build_sub_optimized, gate_budget,
                            gate_cost, sub_budget, sub_cost)
    from .f1 import default_bundle
    from .unstructured import build_qrom, build_sfable, build_unary_iteration

    b = bundle or default_bundle()
    key = id(b)
    if key in _METHOD_COSTS:
        return _METHOD_COSTS[key]
    rows = []
    un = build_unary_iteration(b, simulate=False).encoding
    rows.append(MethodCost("unary", un.cost.slope, un.cost.constant, un.alpha))
    qr = build_qrom(b, simulate=False).encoding
    rows.append(MethodCost("qrom", qr.cost.slope, qr.cost.constant, qr.alpha))
    sf = build_sfable(b).encoding
    pw = sf.meta["cost_piecewise"]
    rows.append(MethodCost("sfable", pw.low[0], pw.low[1], sf.alpha, pw))
    for name, build, cost, budget in (
            ("gate_opt", build_gate_optimized, gate_cost, gate_budget),
            ("sub_opt", build_sub_optimized, sub_cost, sub_budget)):
        a, b0 = collapse_to_single_eps(cost(), budget(b, 1e-10))
        rows.append(MethodCost(name, a, b0, build(b).alpha))
    _METHOD_COSTS[key] = tuple(rows)
    return _METHOD_COSTS[key]


def method_cost(name: str, bundle=None) -> MethodCost:
    for row in method_costs(bundle):
        if row.method == name:
            return row
    raise KeyError(name)
