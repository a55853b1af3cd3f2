# One band matrix with a Gaussian connection profile, then a pooled histogram.
# With b in the hundreds the spectrum already hugs the semicircle of radius 2v.
import numpy as np

from lrperc import EnsembleSpec, eigenvalues_symmetric, sample_matrix, semicircle_density
from lrperc.montecarlo import density_experiment

spec = EnsembleSpec(n=300, b=80.0)
m = sample_matrix(spec, seed=7, realization_index=0)
print(f"N = {spec.N}, nonzero fraction = {np.count_nonzero(m.matrix) / spec.N**2:.3f}")

lam = eigenvalues_symmetric(m).eigenvalues
print(f"extreme eigenvalues {lam[0]:.3f} .. {lam[-1]:.3f} (semicircle edge +-2)")

res = density_experiment(spec, R=10, bins=24, seed=7)
print(f"L1 distance to the semicircle over 10 realizations: {res.l1:.4f}")
print(" bin centre   empirical   semicircle")
for row in res.rows()[4:-4]:
    c = 0.5 * (row["bin_lo"] + row["bin_hi"])
    bar = "#" * int(60 * row["density"])
    print(f"{c:10.3f} {row['density']:11.4f} {semicircle_density(1.0, c):12.4f}  {bar}")
