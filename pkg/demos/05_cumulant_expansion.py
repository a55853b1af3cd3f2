# E{X F(X)} expanded in cumulants.  Gaussian: exact after the first term.
# Rademacher has K4 = -2, so F = x^3 needs q = 3 before the gap closes.
from lrperc.cumulant import Law, expansion_check, function_library

for law in ("gaussian", "rademacher", "uniform"):
    k = Law(law).cumulants()
    print(f"\n{law}: K2={k.K2:g} K4={k.K4:g} K6={k.K6:g}")
    for F in function_library():
        gaps = [expansion_check(law, F, q) for q in (1, 3, 5)]
        cells = "  ".join(f"q={c.q}: {c.gap:9.2e}/{c.bound:9.2e}" for c in gaps)
        print(f"  {F.name:10s} {cells}")
