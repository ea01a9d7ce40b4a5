"""Probability vectors, count tables, hypotheses and multinomial sampling.

Tables are plain numpy arrays. A flat vector of length ``d`` is a
goodness-of-fit histogram; an ``(r, c)`` array is a contingency table whose
flattening is always row-major (top row first, left to right).
"""
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import ValidationError

PROB_SUM_ATOL = 1e-12


def check_probability_vector(p, strictly_positive=False):
    """Validate ``p`` and return it as a float array (any shape).

    Entries must be nonnegative and sum to one within ``1e-12``. With
    ``strictly_positive`` every entry must also exceed zero, which the
    asymptotic goodness-of-fit machinery requires.
    """
    p = np.asarray(p, dtype=float)
    if p.size == 0:
        raise ValidationError("probability vector is empty")
    if not np.all(np.isfinite(p)):
        raise ValidationError("probability vector has non-finite entries")
    if np.any(p < 0):
        raise ValidationError(f"probability vector has negative entries: {p.min()!r}")
    total = p.sum()
    if abs(total - 1.0) > PROB_SUM_ATOL:
        raise ValidationError(f"probabilities sum to {total!r}, not 1")
    if strictly_positive and np.any(p <= 0):
        raise ValidationError("probability vector must be strictly positive")
    return p


def check_count_table(x):
    """Validate a table of nonnegative integer counts and return it as int64."""
    arr = np.asarray(x)
    if arr.size == 0:
        raise ValidationError("count table is empty")
    if not np.issubdtype(arr.dtype, np.integer):
        if not np.all(np.isfinite(arr)) or np.any(arr != np.round(arr)):
            raise ValidationError("count table must hold integers")
    arr = arr.astype(np.int64)
    if np.any(arr < 0):
        raise ValidationError("count table has negative cells")
    return arr


def uniform_probability(d):
    if d < 1:
        raise ValidationError("dimension must be positive")
    return np.full(d, 1.0 / d)


def sample_multinomial(n, p, rng, size=None):
    """Draw ``Multinomial(n, p)`` counts by sequential conditional binomials.

    Cell ``i`` is drawn as ``Binomial(remaining, p_i / remaining_mass)`` and
    the last cell receives whatever is left, so the counts always sum to
    ``n`` exactly. ``p`` may be a flat vector or an ``(r, c)`` table; the
    output has the shape of ``p`` (prefixed by ``size`` for batches).

    Parameters
    ----------
    n : int
        Sample size, at least 1.
    p : array_like
        Cell probabilities.
    rng : numpy.random.Generator
        Random stream; the draw order is fixed so seeds reproduce.
    size : int, optional
        Number of independent tables to draw.
    """
    if int(n) != n or n < 1:
        raise ValidationError(f"sample size must be a positive integer, got {n!r}")
    n = int(n)
    p = check_probability_vector(p)
    shape = p.shape
    flat = p.ravel()
    batch = () if size is None else (int(size),)
    out = np.zeros(batch + (flat.size,), dtype=np.int64)
    remaining = np.full(batch, n, dtype=np.int64)
    mass = 1.0
    for i in range(flat.size - 1):
        if mass <= 0:
            break
        cond = min(max(flat[i] / mass, 0.0), 1.0)
        draw = rng.binomial(remaining, cond)
        out[..., i] = draw
        remaining = remaining - draw
        mass -= flat[i]
    out[..., -1] = remaining
    return out.reshape(batch + shape)


def default_sign_pattern(d):
    """The ``(1, -1, ..., -1, 1)`` perturbation direction for even ``d``.

    The first ``d - 2`` entries alternate starting at ``+1`` and the last
    two are ``(-1, +1)``, so the pattern sums to zero. For ``d = 4`` this is
    ``(1, -1, -1, 1)``.
    """
    if d < 2 or d % 2:
        raise ValidationError(f"sign pattern needs an even dimension, got d={d}")
    head = np.array([1.0 if i % 2 == 0 else -1.0 for i in range(d - 2)])
    return np.concatenate([head, [-1.0, 1.0]])


@dataclass(frozen=True)
class GofAlternate:
    """Alternative hypothesis ``p1 = p0 + step * sign_pattern``.

    Exactly one of ``delta_tilde`` (local alternative, step ``delta_tilde /
    sqrt(n)``) and ``delta_fixed`` (step independent of ``n``) is set.
    ``sign_pattern`` defaults to :func:`default_sign_pattern`.
    """

    delta_tilde: Optional[float] = None
    delta_fixed: Optional[float] = None
    sign_pattern: Optional[Sequence[float]] = None

    def __post_init__(self):
        if (self.delta_tilde is None) == (self.delta_fixed is None):
            raise ValidationError("give exactly one of delta_tilde and delta_fixed")
        value = self.delta_tilde if self.delta_tilde is not None else self.delta_fixed
        if not np.isfinite(value) or value < 0:
            raise ValidationError(f"perturbation must be nonnegative, got {value!r}")

    def pattern(self, d):
        if self.sign_pattern is None:
            return default_sign_pattern(d)
        pat = np.asarray(self.sign_pattern, dtype=float)
        if pat.shape != (d,):
            raise ValidationError(f"sign pattern has length {pat.size}, expected {d}")
        if not np.all(np.abs(pat) == 1):
            raise ValidationError("sign pattern entries must be +1 or -1")
        if pat.sum() != 0:
            raise ValidationError("sign pattern must sum to zero")
        return pat

    def step(self, n):
        if self.delta_tilde is not None:
            return self.delta_tilde / np.sqrt(n)
        return self.delta_fixed


def gof_alternate_probability(p0, alt, n=None):
    """Return the alternative cell probabilities ``p0 + step * pattern``.

    ``n`` is needed only for the local (``delta_tilde``) form.
    """
    p0 = check_probability_vector(p0)
    if p0.ndim != 1:
        raise ValidationError("goodness-of-fit null must be a flat vector")
    if alt.delta_tilde is not None and (n is None or n < 1):
        raise ValidationError("local alternative needs a positive sample size")
    p1 = p0 + alt.step(n) * alt.pattern(p0.size)
    if np.any(p1 <= 0) or np.any(p1 >= 1):
        raise ValidationError("perturbation pushes a cell probability outside (0, 1)")
    return p1


def indep_alternate_probability(delta, literal_pattern=False):
    """2x2 joint cell probabilities with uniform marginals and covariance ``delta``.

    The covariance-consistent direction is ``(+1, -1, -1, +1)`` in row-major
    order. ``literal_pattern=True`` uses ``(+1, -1, +1, -1)`` instead; that
    table has covariance zero between the two indicators and is kept only
    for comparison runs.

    Returns an ``(2, 2)`` array.
    """
    if not np.isfinite(delta) or delta < 0 or delta >= 0.25:
        raise ValidationError(f"covariance must lie in [0, 1/4), got {delta!r}")
    pattern = np.array([1.0, -1.0, 1.0, -1.0]) if literal_pattern else np.array([1.0, -1.0, -1.0, 1.0])
    return (0.25 + delta * pattern).reshape(2, 2)
