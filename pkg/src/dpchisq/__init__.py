"""Differentially private chi-squared goodness-of-fit and independence tests.

The six decision procedures live in :mod:`dpchisq.procedures`; the
asymptotic null laws in :mod:`dpchisq.asymptotics`; the quadratic-form
distribution engine in :mod:`dpchisq.quadform`.
"""
from .asymptotics import (gof_alternate_distribution, gof_null_distribution,
                          indep_null_distribution)
from .denoise import ProjectionConfig, project_table, two_step_mle
from .errors import NumericError, UnsupportedMechanismError, ValidationError
from .model import (GofAlternate, gof_alternate_probability, indep_alternate_probability,
                    sample_multinomial, uniform_probability)
from .privacy import Mechanism, NoisyTable, PrivacyParams, add_noise
from .procedures import (Decision, Reason, TestOutcome, gof_classical, indep_classical,
                         mc_gof, mc_indep, priv_gof, priv_indep)
from .quadform import QuadFormDistribution, critical_value, tail_probability
from .stats import gof_statistic, indep_mle, indep_statistic, product_probability

__version__ = "0.1.0"

__all__ = [
    "Decision", "GofAlternate", "Mechanism", "NoisyTable", "NumericError", "PrivacyParams",
    "ProjectionConfig", "QuadFormDistribution", "Reason", "TestOutcome",
    "UnsupportedMechanismError", "ValidationError", "add_noise", "critical_value",
    "gof_alternate_distribution", "gof_alternate_probability", "gof_classical",
    "gof_null_distribution", "gof_statistic", "indep_alternate_probability",
    "indep_classical", "indep_mle", "indep_null_distribution", "indep_statistic",
    "mc_gof", "mc_indep", "priv_gof", "priv_indep", "product_probability",
    "project_table", "sample_multinomial", "tail_probability", "two_step_mle",
    "uniform_probability",
]
