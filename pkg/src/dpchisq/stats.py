"""Chi-squared statistics and closed-form independence MLEs.

All functions accept real-valued tables so the classical and private paths
share one formula. Leading axes are treated as a batch: a ``(k, d)`` array
of histograms yields ``k`` statistics.
"""
import numpy as np

from .errors import ValidationError
from .model import check_probability_vector
from .privacy import NoisyTable

MIN_EXPECTED_PROB = 1e-12


def _unwrap(x, n):
    if isinstance(x, NoisyTable):
        return np.asarray(x.values, dtype=float), (x.n if n is None else n)
    return np.asarray(x, dtype=float), n


def gof_statistic(x, p0, n=None):
    """Pearson statistic ``sum_i (x_i - n p0_i)^2 / (n p0_i)``.

    ``n`` defaults to the public total of a :class:`NoisyTable`, or to the
    table sum for plain counts. Applied to noisy counts this is the private
    statistic.
    """
    x, n = _unwrap(x, n)
    p0 = check_probability_vector(p0)
    if np.any(p0 < MIN_EXPECTED_PROB):
        raise ValidationError("null probabilities must all exceed 1e-12")
    if x.shape[-p0.ndim:] != p0.shape:
        raise ValidationError(f"table shape {x.shape} does not match null shape {p0.shape}")
    axes = tuple(range(-p0.ndim, 0))
    if n is None:
        n = x.sum(axis=axes)
    n = np.asarray(n, dtype=float)
    if np.any(n <= 0):
        raise ValidationError("sample size must be positive")
    expected = np.expand_dims(n, axes) * p0 if n.ndim else n * p0
    return ((x - expected) ** 2 / expected).sum(axis=axes)


def product_probability(pi1, pi2):
    """Joint table ``f_ij = pi1_i * pi2_j`` as an ``(r, c)`` array.

    Batched marginals of shape ``(..., r)`` and ``(..., c)`` give ``(..., r, c)``.
    """
    pi1 = np.asarray(pi1, dtype=float)
    pi2 = np.asarray(pi2, dtype=float)
    if pi1.ndim == 1 and pi2.ndim == 1:
        check_probability_vector(pi1)
        check_probability_vector(pi2)
    return pi1[..., :, None] * pi2[..., None, :]


def indep_mle(x, n=None):
    """Marginal MLEs ``(row_sums / n, col_sums / n)`` of an ``(..., r, c)`` table."""
    x, n = _unwrap(x, n)
    if x.ndim < 2:
        raise ValidationError("independence MLE needs a two-way table")
    if n is None:
        n = x.sum(axis=(-2, -1))
    n = np.asarray(n, dtype=float)
    if np.any(n <= 0):
        raise ValidationError("sample size must be positive")
    scale = n[..., None] if n.ndim else n
    return x.sum(axis=-1) / scale, x.sum(axis=-2) / scale


def indep_statistic(x, p_hat, n=None):
    """Pearson statistic of an ``(..., r, c)`` table against cell probabilities ``p_hat``.

    ``p_hat`` has the table's trailing shape (or the full batched shape).
    """
    x, n = _unwrap(x, n)
    p_hat = np.asarray(p_hat, dtype=float)
    if np.any(p_hat < MIN_EXPECTED_PROB):
        raise ValidationError("estimated cell probabilities must all exceed 1e-12")
    if x.shape[-2:] != p_hat.shape[-2:]:
        raise ValidationError(f"table shape {x.shape} does not match {p_hat.shape}")
    if n is None:
        n = x.sum(axis=(-2, -1))
    n = np.asarray(n, dtype=float)
    expected = (n[..., None, None] if n.ndim else n) * p_hat
    return ((x - expected) ** 2 / expected).sum(axis=(-2, -1))
