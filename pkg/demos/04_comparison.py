"""Which encoding should an algorithm use?

Amplitude amplification repeats the block encoding about 1/alpha times, so
the figure of merit is T(eps)/alpha.  Adding a state-preparation cost x
per repetition moves the balance toward large alpha.
"""


from blockenc.costs import method_costs
from blockenc.report import efficiency_ratios, merit_crossover, regime_map

print("method     a          b          alpha     T/alpha at 1e-10")
for c in method_costs():
    print(f"{c.method:9s} {c.a:8.1f} {c.b:10.1f}  {c.alpha:.5f}  {c.merit(1e-10):12.0f}")

r = efficiency_ratios(1e-10)
print("relative to gate-optimized:", ", ".join(f"{m} {v:.2f}x" for m, v in r.items()))
print(f"gate- and sub-optimized tie at eps = {merit_crossover('gate_opt', 'sub_opt'):.2e}")

print("\nwinner by state-prep cost x (rows) and accuracy (columns)")
eps = [1e-3, 1e-6, 1e-10, 1e-15]
xs = [0, 200, 1000, 5000, 20000, 1e5]
pts = regime_map(xs, eps)
print("x \\ eps   " + "".join(f"{e:>10.0e}" for e in eps))
for i, x in enumerate(xs):
    row = [p.winner for p in pts if p.x == x]
    print(f"{x:>9g}  " + "".join(f"{w:>10s}" for w in row))
