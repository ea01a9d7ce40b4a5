import math

import numpy as np
import pytest

from dpchisq.errors import UnsupportedMechanismError, ValidationError
from dpchisq.privacy import (Mechanism, PrivacyParams, add_noise, gaussian_sigma,
                             laplace_scale, sample_noise)

# 20 * sqrt(ln(2e6)), evaluated with 30-digit arithmetic
SIGMA_EPS01 = 76.1804640010133291
SIGMA2_EPS01 = 5803.46309540968777


def lap(eps):
    return PrivacyParams(eps, mechanism="laplace")


def gauss(eps, delta):
    return PrivacyParams(eps, delta, "gauss")


@pytest.mark.parametrize("eps, scale", [(0.1, 20.0), (2.0, 1.0), (1.0, 2.0)])
def test_laplace_scale(eps, scale):
    assert laplace_scale(lap(eps)) == pytest.approx(scale, rel=1e-15)


def test_gaussian_sigma_values():
    assert gaussian_sigma(gauss(0.1, 1e-6)) == pytest.approx(SIGMA_EPS01, rel=1e-14)
    assert gaussian_sigma(gauss(2.0, 2 / math.e)) == pytest.approx(1.0, rel=1e-14)
    assert gaussian_sigma(gauss(1.0, 1e-6)) == pytest.approx(SIGMA_EPS01 / 10, rel=1e-14)


def test_gaussian_sigma_monotone():
    eps = np.linspace(0.05, 5, 40)
    s = [gaussian_sigma(gauss(e, 1e-6)) for e in eps]
    assert np.all(np.diff(s) < 0)
    deltas = np.logspace(-10, -0.1, 40)
    s = [gaussian_sigma(gauss(1.0, d)) for d in deltas]
    assert np.all(np.diff(s) < 0)


@pytest.mark.parametrize("kwargs", [
    dict(epsilon=0.0), dict(epsilon=-1.0), dict(epsilon=1.0, delta=1.0),
    dict(epsilon=1.0, delta=0.0), dict(epsilon=1.0, delta=None),
])
def test_invalid_params(kwargs):
    with pytest.raises(ValidationError):
        PrivacyParams(mechanism="gauss", **kwargs)


def test_mechanism_mismatch():
    with pytest.raises(UnsupportedMechanismError):
        laplace_scale(gauss(1.0, 1e-6))
    with pytest.raises(UnsupportedMechanismError):
        gaussian_sigma(lap(1.0))
    with pytest.raises(ValidationError):
        Mechanism.parse("exponential")


def test_zero_noise_hook(rng):
    x = np.array([[3, 4], [5, 6]])
    w = add_noise(x, gauss(0.1, 1e-6).without_noise(), rng)
    assert np.array_equal(w.values, x) and w.n == 18


def test_gaussian_variance(rng):
    z = sample_noise((100_000, 3), gauss(0.1, 1e-6), rng)
    assert np.all(np.abs(z.var(axis=0) / SIGMA2_EPS01 - 1) < 0.03)


def test_laplace_variance(rng):
    z = sample_noise((100_000, 3), lap(0.1), rng)
    assert np.all(np.abs(z.var(axis=0) / 800.0 - 1) < 0.03)


@pytest.mark.parametrize("params", [gauss(0.1, 1e-6), lap(0.1)])
def test_mean_zero_and_uncorrelated(rng, params):
    z = sample_noise((100_000, 4), params, rng)
    se = np.sqrt(params.variance / z.shape[0])
    assert np.all(np.abs(z.mean(axis=0)) < 4 * se)
    corr = np.corrcoef(z.T)[np.triu_indices(4, 1)]
    assert np.all(np.abs(corr) < 4 / np.sqrt(z.shape[0]))


def test_noise_is_seed_reproducible():
    a = sample_noise((5, 5), lap(1.0), np.random.default_rng(1))
    b = sample_noise((5, 5), lap(1.0), np.random.default_rng(1))
    assert np.array_equal(a, b)


def test_zero_noise_consumes_same_stream():
    # the zero-noise hook must not shift later draws
    r1, r2 = np.random.default_rng(9), np.random.default_rng(9)
    sample_noise((4,), gauss(1, 1e-6), r1)
    sample_noise((4,), gauss(1, 1e-6).without_noise(), r2)
    assert r1.random() == r2.random()


def test_noise_unrounded_and_signed(rng):
    w = add_noise(np.zeros(1000, dtype=int), lap(0.5), rng)
    assert np.any(w.values < 0)
    assert np.any(w.values != np.round(w.values))
