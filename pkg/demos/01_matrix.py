"""Build F1 two ways and look at the pieces it is made of.

F1 = P (W (1 + 3C) - I) P acts on 6 qubits.  Only the 27 indices whose
base-4 digits avoid 3 are lattice points; P zeroes the other 37.
"""

import numpy as np

from blockenc.algebraic import build_constituents, verify_constituent_circuits
from blockenc.f1 import build_f1_algebraic, build_f1_elementwise, build_lattice, f1_stats

lat = build_lattice()
bundle = build_f1_algebraic(lat)
elementwise = build_f1_elementwise(lat)
print("dual build max deviation:", np.abs(elementwise - bundle.f1).max())

st = f1_stats(bundle)
print(f"nonzeros {st['nnz']}, distinct values {st['unique']} (zero included)")
print(f"||F1|| = {st['norm']:.6f}, so unstructured encodings reach alpha = {st['norm_over_64']:.5f}")
print(f"{st['count_rotations']} entries need a rotation, {st['count_maximal']} are maximal")

# Each algebraic factor has its own small circuit; check them against the matrices.
cs = build_constituents(bundle)
for name, enc in cs.items():
    print(f"  {name:8s} alpha {enc.alpha:.5f} (multiplicative bookkeeping {enc.nominal_alpha:.5f})")
rep = verify_constituent_circuits(cs, bundle)
print("constituent circuits agree:", rep.ok, f"worst {max(rep.checks.values()):.1e}")
