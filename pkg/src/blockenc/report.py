"""Comparison artifacts: T(eps)/alpha curves, regime maps and the
upper-bound versus average-case table, written as CSV plus a JSON sidecar."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .costs import METHOD_ORDER, MethodCost, method_costs

REGIME_METHODS = ("qrom", "gate_opt", "sub_opt")
COMPARISON_COLUMNS = ("method", "eps", "t_count", "alpha", "merit")
REGIME_COLUMNS = ("x", "log2_inv_eps", "winner")
TABLE1_COLUMNS = ("method", "bound_a", "bound_b", "avg_a", "avg_b")


@dataclass(frozen=True)
class ComparisonRow:
    method: str
    eps: float
    t_count: float
    alpha: float
    figure_of_merit: float

    def __post_init__(self):
        if not math.isclose(self.figure_of_merit, self.t_count / self.alpha, rel_tol=1e-9):
            raise ValueError("figure of merit must equal t_count / alpha")


def _costs(costs: Sequence[MethodCost] | None) -> dict[str, MethodCost]:
    return {c.method: c for c in (costs or method_costs())}


def comparison_table(eps_grid: Iterable[float],
                     costs: Sequence[MethodCost] | None = None) -> list[ComparisonRow]:
    grid = list(eps_grid)
    if not grid:
        raise ValueError("empty eps grid")
    table = _costs(costs)
    rows = []
    for eps in grid:
        for m in METHOD_ORDER:
            c = table[m]
            t = c.t_count(eps)
            rows.append(ComparisonRow(m, float(eps), t, c.alpha, t / c.alpha))
    return rows


def efficiency_ratios(eps: float, reference: str = "gate_opt",
                      costs: Sequence[MethodCost] | None = None) -> dict[str, float]:
    """``merit(method) / merit(reference)``; above 1 means the reference wins."""
    table = _costs(costs)
    ref = table[reference].merit(eps)
    return {m: table[m].merit(eps) / ref for m in METHOD_ORDER}


def merit_crossover(m1: str, m2: str, costs: Sequence[MethodCost] | None = None) -> float | None:
    """``eps`` where two affine methods have equal ``T/alpha`` (None if parallel)."""
    t = _costs(costs)
    a, b = t[m1], t[m2]
    da = a.a / a.alpha - b.a / b.alpha
    if da == 0:
        return None
    log2_inv = (b.b / b.alpha - a.b / a.alpha) / da
    return 2.0 ** -log2_inv


# -- regime map -------------------------------------------------------------

@dataclass(frozen=True)
class RegimePoint:
    x: float
    log2_inv_eps: float
    winner: str


def _winner(x: float, L: float, table: Mapping[str, MethodCost], methods) -> str:
    scores = {m: (table[m].a * L + table[m].b + x) / table[m].alpha for m in methods}
    return min(scores, key=scores.get)


def regime_map(x_range: Sequence[float], eps_range: Sequence[float],
               methods: Sequence[str] = REGIME_METHODS,
               costs: Sequence[MethodCost] | None = None) -> list[RegimePoint]:
    """Winner of ``(a log2(1/eps) + b + x) / alpha`` on a grid.

    ``eps_range`` holds accuracies; points are reported by ``log2(1/eps)``.
    """
    if len(x_range) == 0 or len(eps_range) == 0:
        raise ValueError("empty range")
    table = _costs(costs)
    pts = []
    for eps in eps_range:
        L = math.log2(1.0 / eps)
        for x in x_range:
            pts.append(RegimePoint(float(x), L, _winner(x, L, table, methods)))
    return pts


def tie_x(m1: str, m2: str, log2_inv_eps: float,
          costs: Sequence[MethodCost] | None = None) -> float | None:
    """State-prep cost ``x`` at which two methods tie (linear in ``x``)."""
    t = _costs(costs)
    a, b = t[m1], t[m2]
    if math.isclose(a.alpha, b.alpha):
        return None
    ta = a.a * log2_inv_eps + a.b
    tb = b.a * log2_inv_eps + b.b
    return (a.alpha * tb - b.alpha * ta) / (b.alpha - a.alpha)


def regime_boundaries(methods: Sequence[str] = REGIME_METHODS, eps_min: float = 1e-20,
                      eps_max: float = 1e-2, points: int = 200,
                      costs: Sequence[MethodCost] | None = None) -> dict[str, list[tuple[float, float]]]:
    """Polylines ``(log2(1/eps), x)`` where the winner switches between a pair.

    A tie only counts when both tied methods beat every other compared method.
    """
    table = _costs(costs)
    Ls = np.linspace(math.log2(1 / eps_max), math.log2(1 / eps_min), points)
    out: dict[str, list[tuple[float, float]]] = {}
    for i, m1 in enumerate(methods):
        for m2 in methods[i + 1:]:
            line = []
            for L in Ls:
                x = tie_x(m1, m2, float(L), costs)
                if x is None or x < 0:
                    continue
                s = (table[m1].a * L + table[m1].b + x) / table[m1].alpha
                others = [(table[m].a * L + table[m].b + x) / table[m].alpha
                          for m in methods if m not in (m1, m2)]
                if all(s <= o * (1 + 1e-12) for o in others):
                    line.append((float(L), float(x)))
            out[f"{m1}|{m2}"] = line
    return out


# -- bound versus average-case table ----------------------------------------

@dataclass(frozen=True)
class Table1Row:
    method: str
    bound_a: float
    bound_b: float
    avg_a: float | None
    avg_b: float | None


def table1(fits: Mapping[str, object] | None = None,
           costs: Sequence[MethodCost] | None = None) -> list[Table1Row]:
    """Bound rows from the cost model next to fitted rows (``a``, ``b`` attributes)."""
    table = _costs(costs)
    fits = fits or {}
    rows = []
    for m in METHOD_ORDER:
        fit = fits.get(m)
        rows.append(Table1Row(m, table[m].a, table[m].b,
                              None if fit is None else fit.a,
                              None if fit is None else fit.b))
    return rows


# -- output -----------------------------------------------------------------

def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def to_csv(columns: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    return buf.getvalue()


def comparison_csv(rows: Sequence[ComparisonRow]) -> str:
    return to_csv(COMPARISON_COLUMNS,
                  ((r.method, r.eps, r.t_count, r.alpha, r.figure_of_merit) for r in rows))


def regime_csv(points: Sequence[RegimePoint]) -> str:
    return to_csv(REGIME_COLUMNS, ((p.x, p.log2_inv_eps, p.winner) for p in points))


def boundaries_csv(lines: Mapping[str, list[tuple[float, float]]]) -> str:
    return to_csv(("pair", "log2_inv_eps", "x"),
                  ((pair, L, x) for pair, pts in lines.items() for L, x in pts))


def table1_csv(rows: Sequence[Table1Row]) -> str:
    return to_csv(TABLE1_COLUMNS,
                  ((r.method, r.bound_a, r.bound_b, r.avg_a, r.avg_b) for r in rows))


def sidecar(costs: Sequence[MethodCost] | None = None, **extra) -> dict:
    """JSON metadata: method constants, alphas and whatever grid/seed info is passed."""
    table = _costs(costs)
    meta = {"methods": {m: {"a": c.a, "b": c.b, "alpha": c.alpha} for m, c in table.items()}}
    meta.update(extra)
    return meta


def write_outputs(out_dir: Path, files: Mapping[str, str], meta: Mapping | None = None) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for name, text in files.items():
        p = out_dir / name
        p.write_text(text)
        written.append(p)
    if meta is not None:
        p = out_dir / "metadata.json"
        p.write_text(json.dumps(meta, indent=2, sort_keys=True, default=_json_default) + "\n")
        written.append(p)
    return written


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if hasattr(o, "__dataclass_fields__"):
        return asdict(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not serializable: {type(o)}")
