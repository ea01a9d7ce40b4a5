"""Two-step estimation of independence marginals from a noisy table.

Step one projects the noisy table onto ``{x >= 0, sum x = n}`` under the
elastic-net loss ``(1 - g) ||w - x||_1 + g ||w - x||_2^2``. Step two takes
the closed-form marginal MLEs of the projected table.

For any ``g > 0`` the loss is separable, so the KKT conditions read
``x_i = max(0, w_i + s(mu))`` for one multiplier ``mu``, where ``s`` is a
nondecreasing map that is flat (zero) on ``|mu| <= 1 - g``. The ``l1`` part
only widens the set of multipliers that yield a given ``x``; the optimum is
therefore the Euclidean simplex projection for every ``g`` in ``(0, 1]``,
and :func:`project_table` uses the exact sort-and-threshold algorithm.
An ADMM solver of the split-variable form is kept as an independent
iterative route (``method="admm"``).
"""
from dataclasses import dataclass

import numpy as np

from .errors import NumericError, ValidationError
from .privacy import Mechanism, NoisyTable
from .stats import indep_mle

RULE_OF_THUMB = 5.0
NEGATIVE_CLAMP = 1e-10


@dataclass(frozen=True)
class ProjectionConfig:
    """Elastic-net mix ``gamma`` and solver settings.

    ``gamma`` is 1 for Gaussian noise and small (default 0.01) for Laplace
    noise; ``gamma = 0`` is rejected because the pure ``l1`` problem has no
    unique minimizer.
    """

    gamma: float = 1.0
    tol: float = 1e-8
    max_iter: int = 50_000
    method: str = "exact"

    def __post_init__(self):
        if not (0 < self.gamma <= 1):
            raise ValidationError(f"gamma must lie in (0, 1], got {self.gamma!r}")
        if not self.tol > 0:
            raise ValidationError("tol must be positive")
        if int(self.max_iter) < 1:
            raise ValidationError("max_iter must be positive")
        if self.method not in ("exact", "admm"):
            raise ValidationError(f"unknown projection method {self.method!r}")

    @classmethod
    def for_mechanism(cls, mechanism, gamma_laplace=0.01):
        if Mechanism.parse(mechanism) is Mechanism.LAPLACE:
            return cls(gamma=gamma_laplace)
        return cls(gamma=1.0)


def project_simplex(w, total):
    """Euclidean projection of each row of ``w`` (last axis) onto ``{x >= 0, sum x = total}``."""
    w = np.asarray(w, dtype=float)
    if total <= 0:
        raise ValidationError("projection total must be positive")
    u = -np.sort(-w, axis=-1)
    css = np.cumsum(u, axis=-1) - total
    idx = np.arange(1, w.shape[-1] + 1)
    cond = u - css / idx > 0
    rho = w.shape[-1] - 1 - np.argmax(cond[..., ::-1], axis=-1)
    theta = np.take_along_axis(css, rho[..., None], axis=-1) / (rho[..., None] + 1.0)
    return np.maximum(w - theta, 0.0)


def elastic_net_objective(w, x, gamma):
    d = np.asarray(w, dtype=float) - np.asarray(x, dtype=float)
    return (1.0 - gamma) * np.abs(d).sum() + gamma * (d * d).sum()


def _admm_projection(w, total, cfg, rho=1.0):
    """ADMM on ``min f(w - x) + indicator(x in simplex)`` with split ``x = z``."""
    g, a = cfg.gamma, 1.0 - cfg.gamma
    z = np.full_like(w, total / w.size)
    x = z.copy()
    u = np.zeros_like(w)
    history = []
    for it in range(int(cfg.max_iter)):
        # prox of the separable elastic net around w, evaluated at v
        v = z - u
        c = (2.0 * g * w + rho * v) / (2.0 * g + rho)
        shift = a / (2.0 * g + rho)
        diff = c - w
        x = w + np.sign(diff) * np.maximum(np.abs(diff) - shift, 0.0)
        z_old = z
        z = project_simplex(x + u, total)
        u = u + x - z
        r = np.linalg.norm(x - z)
        s = rho * np.linalg.norm(z - z_old)
        history.append(elastic_net_objective(w, z, g))
        if r <= cfg.tol * max(1.0, np.linalg.norm(z)) and s <= cfg.tol * max(1.0, np.linalg.norm(u)):
            return z, history
    raise NumericError("ADMM projection did not converge",
                       {"primal_residual": float(r), "dual_residual": float(s),
                        "iterations": int(cfg.max_iter)})


def project_table(w, n=None, cfg=None):
    """Closest feasible real-valued table to the noisy table ``w``.

    Parameters
    ----------
    w : NoisyTable or array_like
        Noisy counts; leading axes are a batch when ``method="exact"``.
    n : int, optional
        Public total; taken from ``w`` when it is a :class:`NoisyTable`.
    cfg : ProjectionConfig, optional
        Defaults to ``gamma = 1``.

    Returns
    -------
    ndarray
        Table of the same shape with nonnegative entries summing to ``n``.
    """
    if isinstance(w, NoisyTable):
        n = w.n if n is None else n
        w = w.values
    cfg = cfg or ProjectionConfig()
    w = np.asarray(w, dtype=float)
    if n is None or n <= 0:
        raise ValidationError("projection needs a positive public total")
    if not np.all(np.isfinite(w)):
        raise ValidationError("noisy table has non-finite entries")
    shape = w.shape
    if cfg.method == "admm":
        x, _ = _admm_projection(w.ravel(), float(n), cfg)
    else:
        x = project_simplex(w.reshape(shape[:-2] + (-1,)) if w.ndim >= 2 else w, float(n))
    x = x.reshape(shape)
    x[(x < 0) & (x >= -NEGATIVE_CLAMP)] = 0.0
    return x


def two_step_mle(w, n=None, cfg=None):
    """Marginal estimates from a noisy ``(r, c)`` table, or ``None``.

    ``None`` signals that some cell of the projected table is below 5, the
    usual small-count rule for chi-squared tests.
    """
    if isinstance(w, NoisyTable):
        n = w.n if n is None else n
        w = w.values
    x = project_table(w, n, cfg)
    if np.any(x < RULE_OF_THUMB):
        return None
    return indep_mle(x, n)
