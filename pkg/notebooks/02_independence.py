"""
Private independence testing
============================

The independence tests first denoise the table (projection onto the
nonnegative tables with the right total), then estimate the marginals.
"""
import numpy as np

import dpchisq as dp

rng = np.random.default_rng(1)
gauss = dp.PrivacyParams(epsilon=0.1, delta=1e-6)

# denoising a small noisy table
w = np.array([[30.0, 30.0], [-10.0, -10.0]])
print("projected:", dp.project_table(w, n=40).ravel())

# a dependent 2x2 table with covariance 0.01
p1 = dp.indep_alternate_probability(0.01)
x = dp.sample_multinomial(100_000, p1, rng)
print("counts:\n", x)
print("classical:", dp.indep_classical(x, 0.05).to_dict())
print("private asymptotic:", dp.priv_indep(x, gauss, 0.05, rng).to_dict())
print("Monte Carlo (Gaussian):", dp.mc_indep(x, gauss, 0.05, 100, rng).to_dict())

# at n = 100 the denoised table has small cells and the tests decline to reject
small = dp.sample_multinomial(100, p1, rng)
print("n=100:", dp.priv_indep(small, gauss, 0.05, rng).to_dict())
