"""Three ways to load F1 entry by entry.

Unary iteration walks the 722 nonzeros with 12-control gates and shares
Toffoli ladders between neighbours.  QROM first writes an element index
and then rotates once per distinct value.  S-FABLE rotates in the
Hadamard-conjugated basis, where most angles are tiny.
"""

from blockenc.f1 import default_bundle
from blockenc.unstructured import (build_qrom, build_sfable, build_unary_iteration,
                                   retained_rotations, sfable_magnitude_profile)

b = default_bundle()

unary = build_unary_iteration(b)
s = unary.schedule
print(f"unary: {s.toffoli_pairs} Toffoli pairs, {s.rotations} rotations, "
      f"alpha {unary.encoding.alpha:.5f}, error {unary.encoding.normalized_error():.1e}")
print("  first schedule rows:")
for line in s.to_csv().splitlines()[:4]:
    print("   ", line)

qrom = build_qrom(b)       # 17-qubit simulation, a few seconds
print(f"QROM:  {qrom.encoding.meta['rotations']} rotations, address ladders "
      f"{qrom.encoding.meta['address_T']} T, alpha {qrom.encoding.alpha:.5f}")

sf = build_sfable(b)
prof = sfable_magnitude_profile(sf.angles)
print(f"S-FABLE: max|H F1 H| = {sf.angles.max_abs:.6f}, alpha {sf.encoding.alpha:.5f}")
print(f"  {prof.count_above} of 4096 angles exceed 5.5e-4; "
      f"tail envelope ratio {prof.envelope_max_ratio:.3f}")
for eps in (1e-2, 1e-4, 1e-6):
    print(f"  per-rotation accuracy {eps:g}: keep {retained_rotations(eps)} rotations")

for name, enc in (("unary", unary.encoding), ("QROM", qrom.encoding)):
    c = enc.cost
    print(f"{name:6s} T(eps) = {c.slope:.1f} log2(1/eps) + {c.constant:.1f}")
pw = sf.encoding.meta["cost_piecewise"]
print(f"S-FABLE T(eps) = {pw.low[0]:.1f} log2(1/eps) + {pw.low[1]:.1f} for eps < {pw.boundary:.2e}")
