"""Distribution of weighted sums of 1-df noncentral chi-squares.

A :class:`QuadFormDistribution` is the law of

    sum_j w_j * chi2_1(nc_j) + N(offset, gaussian_variance)

with independent components. Tail probabilities come from Imhof's
inversion of the characteristic function; critical values from a bracketed
root search on the tail.
"""
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate, optimize

from .errors import NumericError, ValidationError

WEIGHT_DROP_RTOL = 1e-10
TRUNCATION_TOL = 1e-8
PANEL_EPSABS = 1e-11
# past this many oscillations the tail is handed to a Fourier-weighted quadrature
MAX_DIRECT_CYCLES = 20.0


@dataclass(frozen=True)
class QuadFormDistribution:
    weights: np.ndarray
    noncentralities: np.ndarray = None
    gaussian_variance: float = 0.0
    offset: float = 0.0

    def __post_init__(self):
        w = np.atleast_1d(np.asarray(self.weights, dtype=float))
        nc = (np.zeros_like(w) if self.noncentralities is None
              else np.atleast_1d(np.asarray(self.noncentralities, dtype=float)))
        if w.ndim != 1 or nc.shape != w.shape:
            raise ValidationError("weights and noncentralities must be 1-d and equally long")
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(nc))):
            raise ValidationError("weights and noncentralities must be finite")
        if np.any(nc < 0):
            raise ValidationError("noncentralities must be nonnegative")
        s2 = float(self.gaussian_variance)
        if not (np.isfinite(s2) and s2 >= 0):
            raise ValidationError("gaussian_variance must be finite and nonnegative")
        if not np.isfinite(self.offset):
            raise ValidationError("offset must be finite")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "noncentralities", nc)
        object.__setattr__(self, "gaussian_variance", s2)
        object.__setattr__(self, "offset", float(self.offset))

    @classmethod
    def central(cls, weights):
        return cls(np.asarray(weights, dtype=float))

    @classmethod
    def chi2(cls, df):
        return cls(np.ones(int(df)))

    @property
    def mean(self):
        return float(np.sum(self.weights * (1.0 + self.noncentralities)) + self.offset)

    @property
    def variance(self):
        w, nc = self.weights, self.noncentralities
        return float(np.sum(2.0 * w**2 * (1.0 + 2.0 * nc)) + self.gaussian_variance)

    def pruned(self):
        """Copy with weights below ``1e-10 * max|w|`` removed.

        A dropped component's mean ``w * (1 + nc)`` is folded into the offset.
        """
        w, nc = self.weights, self.noncentralities
        if w.size == 0:
            return self
        keep = np.abs(w) > WEIGHT_DROP_RTOL * np.max(np.abs(w))
        if keep.all():
            return self
        shift = float(np.sum(w[~keep] * (1.0 + nc[~keep])))
        return QuadFormDistribution(w[keep], nc[keep], self.gaussian_variance, self.offset + shift)

    def cache_key(self, digits=12):
        order = np.lexsort((self.noncentralities, self.weights))

        def rounded(values):
            return tuple(float(f"{v:.{digits}g}") for v in values)

        return (rounded(self.weights[order]), rounded(self.noncentralities[order]),
                float(f"{self.gaussian_variance:.{digits}g}"), float(f"{self.offset:.{digits}g}"))


def _imhof_parts(u, w, nc, s2):
    """Slowly varying phase and amplitude ``1 / (u rho(u))`` of the integrand."""
    lu = np.multiply.outer(u, w)
    lu2 = lu * lu
    phase = 0.5 * np.sum(np.arctan(lu) + nc * lu / (1.0 + lu2), axis=-1)
    log_rho = (0.25 * np.sum(np.log1p(lu2), axis=-1)
               + 0.5 * np.sum(nc * lu2 / (1.0 + lu2), axis=-1)
               + s2 * u * u / 8.0)
    return phase, np.exp(-log_rho) / u


def _truncation_bound(U, w, nc, s2):
    """Imhof's bound on the integral discarded beyond ``U`` (Gaussian factor included)."""
    k = 0.5 * w.size
    lu2 = (w * U) ** 2
    log_den = (math.log(math.pi * k) + k * math.log(U) + 0.5 * np.sum(np.log(np.abs(w)))
               + 0.5 * np.sum(nc * lu2 / (1.0 + lu2)) + s2 * U * U / 8.0)
    return math.exp(-log_den)


def _truncation_point(w, nc, s2, tol=TRUNCATION_TOL):
    hi = 1.0
    while _truncation_bound(hi, w, nc, s2) > tol:
        hi *= 2.0
    lo = hi / 2.0
    if _truncation_bound(lo, w, nc, s2) <= tol:
        lo = 0.0
    while hi - lo > 1e-6 * hi:
        mid = 0.5 * (lo + hi)
        if _truncation_bound(mid, w, nc, s2) > tol:
            lo = mid
        else:
            hi = mid
    return hi


_KRONROD_X = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0])
_KRONROD_X = np.concatenate([_KRONROD_X, -_KRONROD_X[-2::-1]])
_KRONROD_W = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714])
_KRONROD_W = np.concatenate([_KRONROD_W, _KRONROD_W[-2::-1]])
_GAUSS_W = np.zeros(15)
_GAUSS_W[1::2] = [0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                  0.381830050505118944950369775488975, 0.417959183673469387755102040816327,
                  0.381830050505118944950369775488975, 0.279705391489276667901467771423780,
                  0.129484966168869693270611432679082]


def _gauss_kronrod(f, edges, epsabs=PANEL_EPSABS, max_rounds=40):
    """Adaptive Gauss-Kronrod (7, 15) quadrature, vectorized across panels.

    ``f`` maps an array of abscissae to integrand values. Panels whose error
    estimate exceeds their share of ``epsabs`` are bisected.
    """
    a, b = np.asarray(edges[:-1], float), np.asarray(edges[1:], float)
    span = b[-1] - a[0]
    total, err = 0.0, 0.0
    for _ in range(max_rounds):
        half = 0.5 * (b - a)
        mid = 0.5 * (a + b)
        x = mid[:, None] + half[:, None] * _KRONROD_X
        fx = f(x.ravel()).reshape(x.shape)
        kron = half * (fx @ _KRONROD_W)
        e = np.abs(kron - half * (fx @ _GAUSS_W))
        ok = e <= epsabs * (b - a) / span
        total += kron[ok].sum()
        err += e[ok].sum()
        if ok.all():
            return total, err
        a, b, mid = a[~ok], b[~ok], mid[~ok]
        a, b = np.concatenate([a, mid]), np.concatenate([mid, b])
    return total + kron[~ok].sum(), err + e[~ok].sum()


def _panel_edges(a, b, cycle):
    n_panels = max(4, int(math.ceil(4.0 * (b - a) / cycle)))
    return np.linspace(a, b, n_panels + 1)


def _imhof_integral(t, dist):
    w, nc, s2 = dist.weights, dist.noncentralities, dist.gaussian_variance
    slope = 0.5 * (dist.offset - t)

    def integrand(u):
        phase, amp = _imhof_parts(u, w, nc, s2)
        return np.sin(phase + slope * u) * amp

    if slope == 0:
        value, err = integrate.quad(integrand, 0.0, np.inf, epsabs=PANEL_EPSABS, limit=500)
        return value, err
    if w.size == 0:
        # pure Gaussian term: amplitude exp(-s2 u^2 / 8) / u is negligible past here
        U = math.sqrt(8.0 * 50.0 / s2)
    else:
        U = _truncation_point(w, nc, s2)
    cycle = 2.0 * math.pi / abs(slope)
    if U / cycle <= MAX_DIRECT_CYCLES:
        return _gauss_kronrod(integrand, _panel_edges(0.0, U, cycle))

    # long oscillatory tail: finite stretch plus a Fourier integral to infinity
    U0 = MAX_DIRECT_CYCLES * cycle
    total, err = _gauss_kronrod(integrand, _panel_edges(0.0, U0, cycle))
    omega = abs(slope)
    sgn = math.copysign(1.0, slope)

    def amp_sin(u):
        phase, amp = _imhof_parts(u, w, nc, s2)
        return math.sin(phase) * amp

    def amp_cos(u):
        phase, amp = _imhof_parts(u, w, nc, s2)
        return math.cos(phase) * amp

    # sin(phase + sgn*omega*u) = sin(phase) cos(omega u) + sgn cos(phase) sin(omega u)
    v1, e1 = integrate.quad(amp_sin, U0, np.inf, weight="cos", wvar=omega, limlst=200, epsabs=PANEL_EPSABS)
    v2, e2 = integrate.quad(amp_cos, U0, np.inf, weight="sin", wvar=omega, limlst=200, epsabs=PANEL_EPSABS)
    return total + v1 + sgn * v2, err + e1 + e2


def tail_probability(dist, t):
    """``P(Q >= t)`` by Imhof's method, accurate to about ``1e-6`` absolute."""
    if t == -math.inf:
        return 1.0
    if t == math.inf:
        return 0.0
    d = dist.pruned()
    if d.weights.size == 0 and d.gaussian_variance == 0:
        raise ValidationError("distribution is degenerate: no weights and no Gaussian term")
    value, err = _imhof_integral(float(t), d)
    if not np.isfinite(value) or err > 1e-6:
        raise NumericError("Imhof integration did not converge",
                           {"t": float(t), "integral": value, "error_estimate": err})
    p = 0.5 + value / math.pi
    return float(min(1.0, max(0.0, p)))


def cdf(dist, t):
    return 1.0 - tail_probability(dist, t)


def critical_value(dist, alpha, rtol=1e-8):
    """Threshold ``tau`` with ``P(Q >= tau) = alpha``.

    The root is bracketed from ``mean +/- 20 sd`` (widened geometrically if
    needed) and then located by Brent's method, which never leaves the
    bracket. Results are memoised on the rounded distribution parameters,
    so repeated calls with numerically identical laws are free.
    """
    if not (0 < alpha < 1):
        raise ValidationError(f"alpha must lie in (0, 1), got {alpha!r}")
    d = dist.pruned()
    if d.weights.size == 0 and d.gaussian_variance == 0:
        raise ValidationError("distribution is degenerate: no weights and no Gaussian term")
    return _critical_value_cached(d.cache_key(), float(alpha), float(rtol))


@lru_cache(maxsize=8192)
def _critical_value_cached(key, alpha, rtol):
    w, nc, s2, kappa = key
    dist = QuadFormDistribution(np.array(w), np.array(nc), s2, kappa)
    return _solve_critical_value(dist, alpha, rtol)


def _bracket(dist, alpha):
    mean, sd = dist.mean, math.sqrt(dist.variance)
    span = max(sd, 1e-12)
    lo = dist.offset if (np.all(dist.weights >= 0) and dist.gaussian_variance == 0) else mean - 20.0 * span
    hi = mean + 20.0 * span
    step = span
    for _ in range(100):
        if tail_probability(dist, hi) <= alpha:
            break
        lo, hi, step = hi, hi + step, 2.0 * step
    else:
        raise NumericError("could not bracket the critical value from above", {"alpha": alpha, "hi": hi})
    step = span
    for _ in range(100):
        if tail_probability(dist, lo) >= alpha:
            break
        hi, lo, step = lo, lo - step, 2.0 * step
    else:
        raise NumericError("could not bracket the critical value from below", {"alpha": alpha, "lo": lo})
    return lo, hi


def _solve_critical_value(dist, alpha, rtol):
    lo, hi = _bracket(dist, alpha)
    f_lo = tail_probability(dist, lo) - alpha
    f_hi = tail_probability(dist, hi) - alpha
    if f_lo == 0:
        return lo
    if f_hi == 0:
        return hi
    try:
        return optimize.brentq(lambda t: tail_probability(dist, t) - alpha, lo, hi,
                               xtol=rtol * max(abs(dist.mean), 1.0), rtol=rtol, maxiter=200)
    except RuntimeError as exc:
        raise NumericError("critical value search did not converge",
                           {"alpha": alpha, "lo": lo, "hi": hi}) from exc


def sample(dist, rng, size=None, chunk=100_000):
    """Monte Carlo draws of ``sum_j w_j (N_j + sqrt(nc_j))^2 + offset + s N_0``."""
    w, nc = dist.weights, dist.noncentralities
    s = math.sqrt(dist.gaussian_variance)
    shift = np.sqrt(nc)
    count = 1 if size is None else int(size)
    out = np.empty(count)
    done = 0
    while done < count:
        m = min(chunk, count - done)
        draws = np.full(m, dist.offset)
        if w.size:
            z = rng.standard_normal((m, w.size))
            draws += ((z + shift) ** 2) @ w
        if s > 0:
            draws += s * rng.standard_normal(m)
        out[done:done + m] = draws
        done += m
    return float(out[0]) if size is None else out
