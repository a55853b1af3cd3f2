# Leading covariance term T(z1, z2) for a few profiles and entry laws.
# T splits into the Fourier integral Q and a fourth-cumulant correction.
from lrperc import TheoryContext, compute_delta, compute_Q, compute_T, make_profile, solve_w
from lrperc.theory import compare_T_forms

z1, z2 = 4j, -4j
print("w(4i) =", solve_w(1.0, z1), " (exact: i(sqrt 5 - 2))")

for kind, nu in [("gaussian", None), ("exponential", None), ("indicator", None), ("stable", 1.5), ("power_law", 1.5)]:
    for dist in ("gaussian", "rademacher"):
        ctx = TheoryContext(1.0, make_profile(kind, nu), dist)
        d = compute_delta(ctx)
        q = compute_Q(ctx, z1, z2)
        t = compute_T(ctx, z1, z2)
        print(f"{ctx.profile.label:18s} {dist:10s} Delta={d.delta:+.4f}  Q={q.real:.6f}  T={t.real:.6f}")

# The alternative way of writing T carries an extra v^4 on the Delta term.
# At v = 1 nothing changes; elsewhere the two differ and we report how much.
for v in (0.5, 1.0, 1.5):
    ctx = TheoryContext(v, make_profile("gaussian"), "rademacher")
    z = (2 * v + 1.5) * 1j
    cmp = compare_T_forms(ctx, z, z.conjugate())
    print(f"v={v}: canonical {cmp.canonical.real:.6f}, rewritten {cmp.rewrite.real:.6f}, gap {cmp.discrepancy:.2e}")
