import numpy as np
import pytest

from dpchisq.errors import ValidationError
from dpchisq.model import (GofAlternate, check_count_table, check_probability_vector,
                           default_sign_pattern, gof_alternate_probability,
                           indep_alternate_probability, sample_multinomial, uniform_probability)


class TestProbabilityVector:
    def test_accepts_valid(self):
        p = check_probability_vector([0.2, 0.3, 0.5])
        assert p.dtype == float

    @pytest.mark.parametrize("bad", [[0.5, 0.6], [-0.1, 1.1], [], [np.nan, 1.0]])
    def test_rejects_invalid(self, bad):
        with pytest.raises(ValidationError):
            check_probability_vector(bad)

    def test_sum_tolerance(self):
        check_probability_vector([0.5, 0.5 + 5e-13])
        with pytest.raises(ValidationError):
            check_probability_vector([0.5, 0.5 + 1e-11])

    def test_strictly_positive(self):
        check_probability_vector([0.0, 1.0])
        with pytest.raises(ValidationError):
            check_probability_vector([0.0, 1.0], strictly_positive=True)


def test_count_table_rejects_fractions_and_negatives():
    with pytest.raises(ValidationError):
        check_count_table([1.5, 2])
    with pytest.raises(ValidationError):
        check_count_table([[1, -2], [3, 4]])
    assert check_count_table([3.0, 4.0]).dtype == np.int64


class TestSampleMultinomial:
    def test_zero_n_rejected(self, rng):
        with pytest.raises(ValidationError):
            sample_multinomial(0, [0.5, 0.5], rng)

    def test_degenerate_law(self, rng):
        for _ in range(20):
            assert sample_multinomial(1, [1, 0, 0, 0], rng).tolist() == [1, 0, 0, 0]

    def test_invalid_p(self, rng):
        with pytest.raises(ValidationError):
            sample_multinomial(10, [0.5, 0.6], rng)

    def test_large_n_within_five_sd(self, rng):
        x = sample_multinomial(10**6, np.full(4, 0.25), rng)
        sd = np.sqrt(1e6 * 0.25 * 0.75)
        assert x.sum() == 10**6
        assert np.all(np.abs(x - 250_000) < 5 * sd)

    def test_frequencies_match_p(self, rng):
        p = np.array([0.1, 0.2, 0.3, 0.4])
        x = sample_multinomial(100, p, rng, size=100_000)
        freq = x.sum(axis=0) / (100 * 100_000)
        se = np.sqrt(p * (1 - p) / (100 * 100_000))
        assert np.all(np.abs(freq - p) < 3 * se)

    def test_sums_exactly_and_keeps_shape(self, rng):
        p = np.array([[0.1, 0.2], [0.3, 0.4]])
        x = sample_multinomial(57, p, rng, size=500)
        assert x.shape == (500, 2, 2)
        assert np.all(x.sum(axis=(1, 2)) == 57)

    def test_seed_determinism(self):
        a = sample_multinomial(1000, np.full(10, 0.1), np.random.default_rng(5))
        b = sample_multinomial(1000, np.full(10, 0.1), np.random.default_rng(5))
        assert np.array_equal(a, b)


def test_default_sign_pattern():
    assert default_sign_pattern(4).tolist() == [1, -1, -1, 1]
    assert default_sign_pattern(2).tolist() == [-1, 1]
    pat = default_sign_pattern(100)
    assert pat[0] == 1 and pat[-1] == 1 and pat.sum() == 0
    with pytest.raises(ValidationError):
        default_sign_pattern(5)


class TestGofAlternate:
    def test_needs_exactly_one_form(self):
        with pytest.raises(ValidationError):
            GofAlternate()
        with pytest.raises(ValidationError):
            GofAlternate(delta_tilde=1.0, delta_fixed=0.1)

    def test_fixed_step(self):
        alt = GofAlternate(delta_fixed=0.01, sign_pattern=[1, -1, 1, -1])
        p1 = gof_alternate_probability(np.full(4, 0.25), alt)
        assert np.allclose(p1, [0.26, 0.24, 0.26, 0.24])

    def test_local_step_scales_with_n(self):
        alt = GofAlternate(delta_tilde=1.0)
        p1 = gof_alternate_probability(np.full(4, 0.25), alt, n=10_000)
        assert np.allclose(p1, 0.25 + 0.01 * np.array([1, -1, -1, 1]))

    def test_sums_to_one(self, rng):
        for _ in range(50):
            d = 2 * rng.integers(1, 20)
            p0 = rng.dirichlet(np.ones(d)) * 0.5 + 0.5 / d
            p0 /= p0.sum()
            alt = GofAlternate(delta_fixed=0.1 * p0.min())
            assert abs(gof_alternate_probability(p0, alt).sum() - 1) < 1e-12

    def test_out_of_range(self):
        with pytest.raises(ValidationError):
            gof_alternate_probability(np.full(4, 0.25), GofAlternate(delta_fixed=0.3))

    def test_bad_custom_pattern(self):
        with pytest.raises(ValidationError):
            GofAlternate(delta_fixed=0.01, sign_pattern=[1, 1, -1, 1]).pattern(4)


class TestIndepAlternate:
    def test_zero_covariance_is_product(self):
        p = indep_alternate_probability(0.0)
        assert np.array_equal(p, np.outer([0.5, 0.5], [0.5, 0.5]))

    def test_covariance_pattern(self):
        p = indep_alternate_probability(0.01)
        assert np.allclose(p.ravel(), [0.26, 0.24, 0.24, 0.26])
        # covariance of the two indicators: p11 - p1. * p.1
        assert np.isclose(p[0, 0] - p[0].sum() * p[:, 0].sum(), 0.01)

    def test_literal_pattern_has_zero_covariance(self):
        p = indep_alternate_probability(0.01, literal_pattern=True)
        assert np.isclose(p[0, 0] - p[0].sum() * p[:, 0].sum(), 0.0)

    def test_range(self):
        with pytest.raises(ValidationError):
            indep_alternate_probability(0.25)


def test_uniform_probability():
    assert np.allclose(uniform_probability(4), 0.25)
    with pytest.raises(ValidationError):
        uniform_probability(0)
