"""
Significance and power sweeps
=============================

The harness runs a test many times per sample size and reports rates with
binomial standard errors. Trial counts here are small so the script runs
in seconds; the CLI takes the same configs for longer runs.
"""
import dpchisq.harness as h

sig = h.ExperimentConfig(test="priv_gof", d=100, n_grid=[1500, 10**4], trials=200, seed=3)
print(h.run_significance(sig).to_csv())

# Laplace noise buys more power than Gaussian noise at the same epsilon
for mech in ("laplace", "gauss"):
    cfg = h.ExperimentConfig(test="mc_indep", mechanism=mech, covariance=0.01,
                             n_grid=[10**3, 10**4, 10**5], trials=200, seed=4)
    print(h.run_power(cfg).to_csv())
