"""Goodness-of-fit and independence tests: classical, Monte Carlo, asymptotic.

Every test returns a :class:`TestOutcome`. Thresholds are compared with a
strict inequality, so a statistic exactly at the critical value fails to
reject.
"""
import enum
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from . import quadform
from .asymptotics import gof_null_distribution, indep_null_distribution
from .denoise import RULE_OF_THUMB, ProjectionConfig, project_table, two_step_mle
from .errors import UnsupportedMechanismError, ValidationError
from .model import check_count_table, check_probability_vector, sample_multinomial
from .privacy import Mechanism, NoisyTable, add_noise, sample_noise
from .stats import gof_statistic, indep_mle, indep_statistic, product_probability


class Decision(str, enum.Enum):
    REJECT = "Reject"
    FAIL_TO_REJECT = "FailToReject"


class Reason(str, enum.Enum):
    THRESHOLD = "Threshold"
    NULL_MLE = "NullMLE"
    RULE_OF_THUMB = "RuleOfThumb"


@dataclass(frozen=True)
class TestOutcome:
    decision: Decision
    statistic: float
    critical_value: Optional[float]
    reason: Reason = Reason.THRESHOLD

    __test__ = False  # keep pytest from collecting this class

    @property
    def rejected(self):
        return self.decision is Decision.REJECT

    def to_dict(self):
        return {
            "decision": self.decision.value,
            "statistic": None if self.statistic is None or math.isnan(self.statistic) else float(self.statistic),
            "critical_value": None if self.critical_value is None else float(self.critical_value),
            "reason": self.reason.value,
        }


def _threshold_outcome(statistic, critical):
    decision = Decision.REJECT if statistic > critical else Decision.FAIL_TO_REJECT
    return TestOutcome(decision, float(statistic), float(critical), Reason.THRESHOLD)


def mc_threshold_rank(k, alpha):
    """1-based rank ``ceil((k + 1)(1 - alpha))`` of the Monte Carlo threshold.

    Requires ``k > 1 / alpha`` so the rank exists among ``k`` samples.
    """
    if not (0 < alpha < 1):
        raise ValidationError(f"alpha must lie in (0, 1), got {alpha!r}")
    if not k > 1.0 / alpha:
        raise ValidationError(f"need k > 1/alpha = {1.0 / alpha:g} Monte Carlo samples, got {k}")
    # round first so (k+1)(1-alpha) landing a hair above an integer does not bump the rank
    return int(math.ceil(round((k + 1) * (1.0 - alpha), 9)))


def chi2_critical_value(df, alpha):
    """``chi2_{df, 1-alpha}`` through the quadratic-form engine."""
    return quadform.critical_value(quadform.QuadFormDistribution.chi2(df), alpha)


def _as_flat_gof(x, p0):
    p0 = check_probability_vector(p0, strictly_positive=True)
    if p0.ndim != 1:
        raise ValidationError("goodness-of-fit null must be a flat vector")
    values = x.values if isinstance(x, NoisyTable) else np.asarray(x)
    if values.shape != p0.shape:
        raise ValidationError(f"data has shape {values.shape}, null has {p0.shape}")
    return p0


# -- goodness of fit ---------------------------------------------------------

def gof_classical(x, alpha, p0):
    """Pearson goodness-of-fit test against ``chi2_{d-1, 1-alpha}``.

    ``x`` may be a :class:`NoisyTable`; the test then ignores the noise,
    which is the naive (and miscalibrated) use of noisy counts.
    """
    p0 = _as_flat_gof(x, p0)
    if not isinstance(x, NoisyTable):
        x = check_count_table(x)
    q = gof_statistic(x, p0)
    return _threshold_outcome(q, chi2_critical_value(p0.size - 1, alpha))


def mc_gof(x, params, alpha, p0, k, rng):
    """Monte Carlo private goodness-of-fit test.

    The observed counts are released with noise, and the threshold is the
    ``ceil((k+1)(1-alpha))``-th smallest of ``k`` statistics simulated under
    the null with fresh multinomial data and fresh noise.
    """
    p0 = _as_flat_gof(x, p0)
    t = mc_threshold_rank(k, alpha)
    x = check_count_table(x)
    n = int(x.sum())
    w = add_noise(x, params, rng)
    q = gof_statistic(w, p0)
    reps = sample_multinomial(n, p0, rng, size=k)
    reps = reps + sample_noise(reps.shape, params, rng)
    sims = np.sort(gof_statistic(reps, p0, n=np.full(k, n)))
    return _threshold_outcome(q, sims[t - 1])


def priv_gof(x, params, alpha, p0, rng):
    """Asymptotic private goodness-of-fit test (Gaussian noise only)."""
    if params.mechanism is not Mechanism.GAUSSIAN:
        raise UnsupportedMechanismError("priv_gof needs the Gaussian mechanism")
    p0 = _as_flat_gof(x, p0)
    x = check_count_table(x)
    n = int(x.sum())
    w = add_noise(x, params, rng)
    q = gof_statistic(w, p0)
    tau = gof_private_critical_value(p0, n, params, alpha)
    return _threshold_outcome(q, tau)


def gof_private_critical_value(p0, n, params, alpha):
    """``tau^alpha`` of the asymptotic private goodness-of-fit test.

    The value depends only on ``(p0, n, params, alpha)``, so it is memoised;
    simulation sweeps then pay for one eigendecomposition per sample size.
    """
    p0 = check_probability_vector(p0, strictly_positive=True)
    return _gof_tau_cached(p0.tobytes(), p0.shape, int(n), params, float(alpha))


@lru_cache(maxsize=256)
def _gof_tau_cached(p0_bytes, shape, n, params, alpha):
    p0 = np.frombuffer(p0_bytes, dtype=float).reshape(shape)
    return quadform.critical_value(gof_null_distribution(p0, n, params), alpha)


# -- independence ------------------------------------------------------------

def _as_two_way(x):
    values = x.values if isinstance(x, NoisyTable) else np.asarray(x)
    if values.ndim != 2 or min(values.shape) < 2:
        raise ValidationError(f"independence tests need an r x c table with r, c >= 2, got {values.shape}")


def indep_classical(x, alpha):
    """Pearson independence test with the all-cells-at-least-5 rule.

    Rejects only when the statistic exceeds ``chi2_{(r-1)(c-1), 1-alpha}``
    and every input cell is at least 5.
    """
    _as_two_way(x)
    if not isinstance(x, NoisyTable):
        x = check_count_table(x)
    values = x.values if isinstance(x, NoisyTable) else x
    r, c = values.shape
    tau = chi2_critical_value((r - 1) * (c - 1), alpha)
    try:
        pi1, pi2 = indep_mle(x)
        q = float(indep_statistic(x, product_probability(pi1, pi2)))
    except ValidationError:
        q = math.nan
    if np.any(values < RULE_OF_THUMB):
        return TestOutcome(Decision.FAIL_TO_REJECT, q, tau, Reason.RULE_OF_THUMB)
    return _threshold_outcome(q, tau)


def _null_outcome():
    return TestOutcome(Decision.FAIL_TO_REJECT, math.nan, None, Reason.NULL_MLE)


def mc_indep(x, params, alpha, k, rng, cfg=None):
    """Monte Carlo private independence test.

    Marginals are estimated from the noisy table by the two-step MLE. Each
    of the ``k`` replicas draws a fresh table from the estimated product
    law, adds fresh noise and re-estimates its own marginals; if any
    estimate is ``None`` the test fails to reject.
    """
    _as_two_way(x)
    t = mc_threshold_rank(k, alpha)
    cfg = cfg or ProjectionConfig.for_mechanism(params.mechanism)
    x = check_count_table(x)
    n = int(x.sum())
    w = add_noise(x, params, rng)
    est = two_step_mle(w, cfg=cfg)
    if est is None:
        return _null_outcome()
    p_tilde = product_probability(*est)
    q = float(indep_statistic(w, p_tilde))

    reps = sample_multinomial(n, p_tilde, rng, size=k)
    reps = reps + sample_noise(reps.shape, params, rng)
    proj = project_table(reps, n, cfg) if cfg.method == "exact" else np.stack(
        [project_table(r, n, cfg) for r in reps])
    if np.any(proj < RULE_OF_THUMB):
        return TestOutcome(Decision.FAIL_TO_REJECT, q, None, Reason.NULL_MLE)
    pi1, pi2 = indep_mle(proj, n)
    sims = np.sort(indep_statistic(reps, product_probability(pi1, pi2), n=np.full(k, n)))
    return _threshold_outcome(q, sims[t - 1])


def priv_indep(x, params, alpha, rng, cfg=None):
    """Asymptotic private independence test (Gaussian noise only).

    The critical value depends on the estimated marginals, so it is
    recomputed for every call.
    """
    if params.mechanism is not Mechanism.GAUSSIAN:
        raise UnsupportedMechanismError("priv_indep needs the Gaussian mechanism")
    _as_two_way(x)
    cfg = cfg or ProjectionConfig.for_mechanism(params.mechanism)
    x = check_count_table(x)
    n = int(x.sum())
    w = add_noise(x, params, rng)
    est = two_step_mle(w, cfg=cfg)
    if est is None:
        return _null_outcome()
    pi1, pi2 = est
    q = float(indep_statistic(w, product_probability(pi1, pi2)))
    tau = quadform.critical_value(indep_null_distribution(pi1, pi2, n, params), alpha)
    return _threshold_outcome(q, tau)
