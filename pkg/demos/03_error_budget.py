"""Splitting an error budget across rotation sources.

The algebraic encodings have a handful of distinct rotations.  The T-count
is affine in log2(1/eps_i) per source and the error bound is linear in the
eps_i, so a Lagrange multiplier gives the cheapest split in closed form.
A perturbed build then shows how far below the bound a real error lands.
"""

import numpy as np

from blockenc.algebraic import (build_gate_optimized, build_sub_optimized, gate_budget,
                                gate_cost, sub_budget, sub_cost)
from blockenc.costs import collapse_to_single_eps
from blockenc.f1 import default_bundle
from blockenc.montecarlo import algebraic_rotations

b = default_bundle()
eps = 1e-6
rng = np.random.default_rng(0)

for kind, budget, cost, build in (("gate", gate_budget, gate_cost, build_gate_optimized),
                                  ("sub", sub_budget, sub_cost, build_sub_optimized)):
    bud = budget(b, eps)
    ratios = bud.ratios()
    print(f"{kind}-optimized split:",
          ", ".join(f"{k}={v:.3f}" for k, v in ratios.items()))
    a, b0 = collapse_to_single_eps(cost(), bud)
    print(f"  T(eps) = {a:.1f} log2(1/eps) + {b0:.1f}; bound at this split = {bud.bound():.3e}")
    rots, _ = algebraic_rotations(kind, bud.allocations, rng)
    enc = build(b, eps, rots)
    print(f"  one perturbed build: alpha {enc.alpha:.5f}, error {enc.normalized_error():.3e} "
          f"(bound {enc.err_bound:.3e})")
