"""Limiting laws of the Gaussian-noise chi-squared statistics.

The private statistic is a quadratic form ``W' A W`` of the stacked vector
``W = (U, V)`` of standardized cell deviations ``U`` and standardized noise
``V``. Under the null, ``W`` is asymptotically ``N(mu, S)`` with ``S``
idempotent, and the law of ``W' A W`` follows from the eigenvalues of
``B' A B`` where ``B B' = S`` and ``B' B = I``.
"""
import json
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import NumericError, UnsupportedMechanismError, ValidationError
from .model import check_probability_vector
from .privacy import Mechanism
from .quadform import QuadFormDistribution, WEIGHT_DROP_RTOL

EIG_TOL = 1e-6
GRAM_COND_LIMIT = 1e12


@dataclass(frozen=True)
class CovarianceModel:
    """Idempotent covariance ``sigma`` with orthonormal factor ``factor`` (``B``)."""

    sigma: np.ndarray
    factor: np.ndarray

    @property
    def rank(self):
        return self.factor.shape[1]


@dataclass(frozen=True)
class WeightMatrix:
    """``A = [[I, L], [L, L^2]]`` with ``L = diag(lam)``."""

    A: np.ndarray
    lam: np.ndarray


def idempotent_factor(sigma):
    """Factor an idempotent symmetric matrix as ``B B'`` with ``B' B = I``.

    Eigenvalues must sit within ``1e-6`` of 0 or 1; anything else means the
    input is not a projector and raises :class:`NumericError`.
    """
    sigma = np.asarray(sigma, dtype=float)
    sym = 0.5 * (sigma + sigma.T)
    vals, vecs = np.linalg.eigh(sym)
    ones = np.abs(vals - 1.0) <= EIG_TOL
    zeros = np.abs(vals) <= EIG_TOL
    if not np.all(ones | zeros):
        bad = vals[~(ones | zeros)]
        raise NumericError("covariance is not idempotent", {"eigenvalues": bad.tolist()})
    return CovarianceModel(sigma=sym, factor=vecs[:, ones])


def block_diag_identity(model, m):
    """``diag(sigma, I_m)`` with its factor, for the stacked ``(U, V)`` vector."""
    d = model.sigma.shape[0]
    sigma = scipy.linalg.block_diag(model.sigma, np.eye(m))
    factor = np.zeros((d + m, model.rank + m))
    factor[:d, :model.rank] = model.factor
    factor[d:, model.rank:] = np.eye(m)
    return CovarianceModel(sigma=sigma, factor=factor)


def build_gof_sigma(p0):
    """``I - sqrt(p0) sqrt(p0)'``: covariance of the standardized cell deviations."""
    p0 = check_probability_vector(p0, strictly_positive=True).ravel()
    root = np.sqrt(p0)
    return idempotent_factor(np.eye(p0.size) - np.outer(root, root))


def _require_gaussian(params):
    if params.mechanism is not Mechanism.GAUSSIAN:
        raise UnsupportedMechanismError(
            "asymptotic distributions are derived for Gaussian noise only; "
            "use the Monte Carlo tests with Laplace noise")


def build_weight_matrix(p, n, params):
    """Block matrix ``A`` for cell probabilities ``p`` (flattened row-major)."""
    _require_gaussian(params)
    p = check_probability_vector(p, strictly_positive=True).ravel()
    if n <= 0:
        raise ValidationError("sample size must be positive")
    lam = params.scale / np.sqrt(n * p)
    L = np.diag(lam)
    A = np.block([[np.eye(p.size), L], [L, L @ L]])
    return WeightMatrix(A=A, lam=lam)


def _projected_weights(model, weights):
    """Eigen-decomposition of ``B' A B`` for the stacked covariance model."""
    B = model.factor
    M = B.T @ weights.A @ B
    vals, H = np.linalg.eigh(0.5 * (M + M.T))
    return vals, H


def gof_null_distribution(p0, n, params):
    """Central law ``sum_j w_j chi2_1`` of the private goodness-of-fit statistic."""
    p0 = check_probability_vector(p0, strictly_positive=True)
    weights = build_weight_matrix(p0, n, params)
    stacked = block_diag_identity(build_gof_sigma(p0), p0.size)
    vals, _ = _projected_weights(stacked, weights)
    return QuadFormDistribution.central(_drop_small(vals))


def _drop_small(vals):
    vals = np.sort(vals)[::-1]
    if vals.size == 0:
        return vals
    keep = np.abs(vals) > WEIGHT_DROP_RTOL * np.max(np.abs(vals))
    return vals[keep]


def alternate_mean_shift(p0, alt):
    """Limit of the standardized deviations' mean under a local alternative.

    ``mu_i = delta_tilde * pattern_i / sqrt(p0_i)``.
    """
    if alt.delta_tilde is None:
        raise ValidationError("the limiting alternative law needs the local (delta_tilde) form")
    p0 = check_probability_vector(p0, strictly_positive=True)
    return alt.delta_tilde * alt.pattern(p0.size) / np.sqrt(p0)


def gof_alternate_distribution(p0, alt, n, params, rng=None):
    """Limiting law of the private statistic under a local alternative.

    Returns ``sum_j w_j chi2_1(nc_j) + N(offset, s2)`` where ``w`` are the
    positive eigenvalues of ``B' A B``, ``b = H' B' A mu'``,
    ``nc_j = (b_j / w_j)^2``, ``s2 = 4 sum_{w_j = 0} b_j^2`` and
    ``offset = mu' A mu - sum_j b_j^2 / w_j``.

    ``rng``, when given, flips the sign of each eigenvector at random; the
    result must not change because only ``b_j^2`` enters.
    """
    p0 = check_probability_vector(p0, strictly_positive=True)
    if p0.ndim != 1 or p0.size % 2:
        raise ValidationError("local alternative needs an even-dimensional flat null")
    weights = build_weight_matrix(p0, n, params)
    stacked = block_diag_identity(build_gof_sigma(p0), p0.size)
    vals, H = _projected_weights(stacked, weights)
    if rng is not None:
        H = H * rng.choice([-1.0, 1.0], size=H.shape[1])
    mu = np.concatenate([alternate_mean_shift(p0, alt), np.zeros(p0.size)])
    b = H.T @ (stacked.factor.T @ (weights.A @ mu))

    order = np.argsort(vals)[::-1]
    vals, b = vals[order], b[order]
    positive = vals > WEIGHT_DROP_RTOL * max(np.max(np.abs(vals)), 0.0)
    lam, bp = vals[positive], b[positive]
    nc = (bp / lam) ** 2
    s2 = 4.0 * float(np.sum(b[~positive] ** 2))
    offset = float(mu @ weights.A @ mu - np.sum(bp**2 / lam))
    return QuadFormDistribution(lam, nc, s2, offset)


def indep_jacobian(pi1, pi2):
    """Jacobian of the product map in the free parameters.

    Rows follow the row-major cells ``(i, j)``; columns are
    ``pi1_1..pi1_{r-1}`` then ``pi2_1..pi2_{c-1}``, with the last entry of
    each marginal eliminated through the sum-to-one constraint.
    """
    pi1 = np.asarray(pi1, dtype=float)
    pi2 = np.asarray(pi2, dtype=float)
    r, c = pi1.size, pi2.size
    J = np.zeros((r * c, r + c - 2))
    for i in range(r):
        for j in range(c):
            row = i * c + j
            for a in range(r - 1):
                J[row, a] = pi2[j] * ((i == a) - (i == r - 1))
            for b in range(c - 1):
                J[row, r - 1 + b] = pi1[i] * ((j == b) - (j == c - 1))
    return J


def _check_marginal(pi, name):
    pi = check_probability_vector(pi)
    if pi.ndim != 1 or pi.size < 2:
        raise ValidationError(f"{name} must be a flat vector with at least two entries")
    if np.any(pi <= 0) or np.any(pi >= 1):
        raise ValidationError(f"{name} entries must lie strictly inside (0, 1)")
    return pi


def build_indep_sigma(pi1, pi2):
    """``I - sqrt(p) sqrt(p)' - G (G'G)^{-1} G'`` with ``G = diag(sqrt p)^{-1} J``."""
    pi1 = _check_marginal(pi1, "pi1")
    pi2 = _check_marginal(pi2, "pi2")
    p = np.outer(pi1, pi2).ravel()
    root = np.sqrt(p)
    G = indep_jacobian(pi1, pi2) / root[:, None]
    gram = G.T @ G
    if np.linalg.cond(gram) > GRAM_COND_LIMIT:
        raise NumericError("Jacobian Gram matrix is ill-conditioned",
                           {"condition_number": float(np.linalg.cond(gram))})
    proj = G @ scipy.linalg.solve(gram, G.T, assume_a="pos")
    sigma = np.eye(p.size) - np.outer(root, root) - proj
    return idempotent_factor(sigma)


def indep_null_distribution(pi1, pi2, n, params):
    """Central law of the private independence statistic at estimated marginals."""
    model = build_indep_sigma(pi1, pi2)
    p = np.outer(pi1, pi2).ravel()
    p = p / p.sum()
    weights = build_weight_matrix(p, n, params)
    stacked = block_diag_identity(model, p.size)
    vals, _ = _projected_weights(stacked, weights)
    return QuadFormDistribution.central(_drop_small(vals))


def dump_diagnostics(path, sigma, A, weights):
    """Write ``sigma``, ``A`` and the weights to ``path`` as JSON."""
    payload = {
        "sigma": np.asarray(sigma).tolist(),
        "A": np.asarray(A).tolist(),
        "weights": np.asarray(weights).tolist(),
    }
    with open(path, "w") as fh:
        json.dump(payload, fh)
