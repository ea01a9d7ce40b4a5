"""
Private goodness-of-fit testing
===============================

Counts released with Gaussian noise no longer follow the classical
chi-squared law. This script shows the gap and the two private tests
that close it.
"""
import numpy as np

import dpchisq as dp
from dpchisq.procedures import mc_threshold_rank

rng = np.random.default_rng(0)
params = dp.PrivacyParams(epsilon=0.1, delta=1e-6)
print("Gaussian noise sd:", round(params.scale, 2))

# a 100-cell histogram drawn under the null
d, n = 100, 10_000
p0 = dp.uniform_probability(d)
x = dp.sample_multinomial(n, p0, rng)

# the classical test on noisy counts rejects almost always
w = dp.add_noise(x, params, rng)
print("classical on noisy counts:", dp.gof_classical(w, 0.05, p0).to_dict())

# the asymptotic private test uses a weighted chi-squared threshold
out = dp.priv_gof(x, params, 0.05, p0, rng)
print("private asymptotic test:", out.to_dict())

# thresholds shrink towards the classical 123.23 as n grows
for size in (1500, 10**4, 10**5, 10**6):
    tau = dp.critical_value(dp.gof_null_distribution(p0, size, params), 0.05)
    print(f"n={size:>8}: tau = {tau:10.1f}")

# the Monte Carlo test simulates its own threshold; works for Laplace noise too
laplace = dp.PrivacyParams(epsilon=0.1, mechanism="laplace")
print("threshold rank for k=100:", mc_threshold_rank(100, 0.05))
print("Monte Carlo test:", dp.mc_gof(x, laplace, 0.05, p0, 100, rng).to_dict())
