# Density-density correlations inside the bulk blow up like s^-(2 - 1/nu)
# as the separation s shrinks; nu is read off the small-p behaviour of the
# profile's Fourier transform.  Gaussian-like profiles give 3/2.
import numpy as np

from lrperc import TheoryContext, expansion_data, fit_scaling_exponent, make_profile

seps = np.logspace(-2, -5, 7)
for kind, nu in [("gaussian", None), ("exponential", None), ("indicator", None),
                 ("stable", 1.2), ("stable", 1.5), ("power_law", 1.5)]:
    prof = make_profile(kind, nu)
    e = expansion_data(prof)
    fit = fit_scaling_exponent(TheoryContext(1.0, prof), 0.0, seps)
    print(f"{prof.label:18s} nu={e.nu:.2f} c1={e.c1:.5f}  slope {fit.slope:+.4f} "
          f"(expected {fit.expected_slope:+.4f})  amplitude {fit.amplitude:+.4f} vs {fit.predicted_amplitude:+.4f}")
