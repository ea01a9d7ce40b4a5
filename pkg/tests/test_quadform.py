import math

import numpy as np
import pytest
from scipy import stats

from dpchisq import quadform as qf
from dpchisq.errors import ValidationError
from dpchisq.quadform import QuadFormDistribution, critical_value, tail_probability

# chi2_{df, 0.95} from a 30-digit root solve of the regularized incomplete gamma
CHI2_95 = {1: 3.84145882069412587, 3: 7.81472790325117983, 9: 16.9189776046204497,
           99: 123.225221453361806}


def random_distribution(rng, max_terms=30, negative=False):
    m = int(rng.integers(1, max_terms + 1))
    w = rng.uniform(0.1, 5.0, m)
    if negative:
        w[: m // 3] *= -1
    nc = np.where(rng.random(m) < 0.5, rng.uniform(0, 4, m), 0.0)
    s2 = float(rng.uniform(0, 4)) if rng.random() < 0.5 else 0.0
    return QuadFormDistribution(w, nc, s2, float(rng.uniform(-2, 2)))


class TestConstruction:
    def test_length_mismatch(self):
        with pytest.raises(ValidationError):
            QuadFormDistribution([1.0, 2.0], [0.0])

    def test_negative_noncentrality(self):
        with pytest.raises(ValidationError):
            QuadFormDistribution([1.0], [-1.0])

    def test_moments(self):
        d = QuadFormDistribution([2.0, 3.0], [1.0, 0.0], 4.0, 1.5)
        assert d.mean == pytest.approx(2 * 2 + 3 + 1.5)
        assert d.variance == pytest.approx(2 * 4 * 3 + 2 * 9 + 4)

    def test_pruned_folds_mean(self):
        d = QuadFormDistribution([1.0, 1e-14], [0.0, 2.0])
        p = d.pruned()
        assert p.weights.tolist() == [1.0]
        assert p.offset == pytest.approx(3e-14)


class TestTail:
    def test_limits(self):
        d = QuadFormDistribution.chi2(3)
        assert tail_probability(d, -math.inf) == 1.0
        assert tail_probability(d, math.inf) == 0.0

    def test_degenerate(self):
        with pytest.raises(ValidationError):
            tail_probability(QuadFormDistribution(np.zeros(0)), 1.0)
        with pytest.raises(ValidationError):
            critical_value(QuadFormDistribution([0.0, 0.0]), 0.05)

    def test_ninety_nine_ones(self):
        assert tail_probability(QuadFormDistribution.chi2(99), 123.23) == pytest.approx(0.05, abs=2e-4)

    def test_scaled_single_weight(self):
        t = 2 * CHI2_95[1]
        assert tail_probability(QuadFormDistribution([2.0]), t) == pytest.approx(0.05, abs=1e-6)

    def test_scaled_single_weight_mc(self, rng):
        draws = qf.sample(QuadFormDistribution([2.0]), rng, 10**6)
        se = math.sqrt(0.05 * 0.95 / 1e6)
        assert abs((draws >= 7.683).mean() - 0.05) < 4 * se

    @pytest.mark.parametrize("scale", [0.01, 1.0, 37.0, 5000.0])
    def test_single_weight_matches_chi2(self, scale):
        d = QuadFormDistribution([scale])
        for t in scale * np.array([0.001, 0.1, 1.0, 3.0, 9.0, 25.0]):
            assert tail_probability(d, t) == pytest.approx(stats.chi2.sf(t / scale, 1), abs=1e-6)

    @pytest.mark.parametrize("df", [2, 5, 30, 199])
    def test_unit_weights_match_chi2(self, df):
        d = QuadFormDistribution.chi2(df)
        for q in (0.01, 0.3, 0.5, 0.9, 0.999):
            t = stats.chi2.ppf(q, df)
            assert tail_probability(d, t) == pytest.approx(1 - q, abs=1e-6)

    def test_noncentral_matches_ncx2(self):
        d = QuadFormDistribution(np.ones(4), [3.0, 0.0, 1.0, 0.0])
        for t in (0.5, 4.0, 12.0, 30.0):
            assert tail_probability(d, t) == pytest.approx(stats.ncx2.sf(t, 4, 4.0), abs=1e-6)

    def test_pure_gaussian(self):
        d = QuadFormDistribution(np.zeros(0), gaussian_variance=9.0, offset=2.0)
        for t in (-4.0, 0.0, 2.0, 5.0, 11.0):
            assert tail_probability(d, t) == pytest.approx(stats.norm.sf(t, 2.0, 3.0), abs=1e-6)

    def test_gaussian_plus_chi2(self, rng):
        d = QuadFormDistribution([1.0, 2.0], [0.5, 0.0], 3.0, -1.0)
        draws = qf.sample(d, rng, 10**6)
        for t in (0.0, 3.0, 8.0):
            assert tail_probability(d, t) == pytest.approx((draws >= t).mean(), abs=3e-3)

    def test_negative_weights(self, rng):
        d = QuadFormDistribution([3.0, -1.0, 0.5], [0.0, 1.0, 0.0])
        draws = qf.sample(d, rng, 10**6)
        for t in (-3.0, 0.0, 2.0, 10.0):
            assert tail_probability(d, t) == pytest.approx((draws >= t).mean(), abs=3e-3)

    def test_nonincreasing(self, rng):
        for _ in range(20):
            d = random_distribution(rng)
            sd = math.sqrt(d.variance)
            grid = np.linspace(d.mean - 4 * sd, d.mean + 6 * sd, 100)
            tails = np.array([tail_probability(d, t) for t in grid])
            assert np.all(np.diff(tails) <= 2e-6)


class TestCriticalValue:
    @pytest.mark.parametrize("df", sorted(CHI2_95))
    def test_chi2_quantiles(self, df):
        assert critical_value(QuadFormDistribution.chi2(df), 0.05) == pytest.approx(CHI2_95[df], rel=1e-7)

    def test_bad_alpha(self):
        for alpha in (0.0, 1.0, -0.1):
            with pytest.raises(ValidationError):
                critical_value(QuadFormDistribution.chi2(2), alpha)

    def test_round_trip(self, rng):
        for _ in range(10):
            d = random_distribution(rng, negative=rng.random() < 0.3)
            for alpha in (0.01, 0.05, 0.5):
                tau = critical_value(d, alpha)
                assert tail_probability(d, tau) == pytest.approx(alpha, abs=2e-6)

    def test_decreasing_in_alpha(self):
        d = QuadFormDistribution([5.0, 1.0, 0.2])
        taus = [critical_value(d, a) for a in (0.01, 0.05, 0.1, 0.5)]
        assert np.all(np.diff(taus) < 0)

    def test_mc_self_consistency(self, rng):
        d = QuadFormDistribution([4.0, 1.0, 1.0], [1.0, 0.0, 2.0], 1.0, 0.5)
        tau = critical_value(d, 0.05)
        draws = qf.sample(d, rng, 10**6)
        assert abs((draws >= tau).mean() - 0.05) < 4 * math.sqrt(0.05 * 0.95 / 1e6)


class TestSample:
    def test_constant(self, rng):
        d = QuadFormDistribution([0.0, 0.0], offset=5.0)
        assert np.all(qf.sample(d, rng, 100) == 5.0)
        assert qf.sample(d, rng) == 5.0

    def test_mean_identity(self, rng):
        d = QuadFormDistribution([1.0, 2.5, 0.3], [2.0, 0.0, 5.0], 2.0, -1.0)
        draws = qf.sample(d, rng, 10**6, chunk=300_000)
        se = math.sqrt(d.variance / 1e6)
        assert abs(draws.mean() - d.mean) < 4 * se

    def test_reproducible(self):
        d = QuadFormDistribution([1.0, 2.0])
        a = qf.sample(d, np.random.default_rng(3), 10)
        b = qf.sample(d, np.random.default_rng(3), 10)
        assert np.array_equal(a, b)
