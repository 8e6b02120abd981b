"""Average-case error with randomly perturbed rotations.

Bounds assume every rotation error points the same way.  Random errors
partly cancel, so the achieved error is smaller than budgeted and the
fitted cost curve sits below the bound.  This runs a reduced number of
trials; the CLI's ``simulate`` subcommand uses the full defaults.
"""

from blockenc.costs import method_costs
from blockenc.montecarlo import simulate_average

grid = (1e-4, 1e-6, 1e-8, 1e-10)
bounds = {c.method: c for c in method_costs()}
for m in ("unary", "qrom", "gate_opt", "sub_opt"):
    f = simulate_average(m, grid, trials=40, rng_seed=42)
    worst = max(r.error / r.bound for r in f.records)
    print(f"{m:9s} fit {f.a:8.2f} log2(1/e) + {f.b:9.1f}   bound constant {bounds[m].b:9.1f}   "
          f"gap {bounds[m].b - f.b:7.1f}   worst error/bound {worst:.2f}")
