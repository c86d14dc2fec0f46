import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from avgfusion.core import FusionWeights
from avgfusion.vfusion import (
    BoundaryOptimum,
    aa_mse_lower_bound,
    aa_mse_two,
    aa_variance,
    aa_variance_lower_bound,
    aa_variance_two,
    h_function,
    optimal_aa_weights,
    unweighted_aa_beats_best,
    unweighted_gain_threshold,
    v_aa,
    v_ga,
)

weights2 = st.floats(1e-3, 1 - 1e-3).map(FusionWeights.pair)
variances = st.floats(0.1, 1e4)
corr = st.floats(-0.99, 0.99)


@st.composite
def weight_vectors(draw, n):
    raw = draw(st.lists(st.floats(0.05, 1.0), min_size=n, max_size=n))
    s = sum(raw)
    return FusionWeights(tuple(r / s for r in raw[:-1]) + (1.0 - sum(r / s for r in raw[:-1]),))


class TestPointFusion:
    @pytest.mark.parametrize("vals,w,expected", [
        ([10, 10], [0.3, 0.7], 10.0),
        ([50, 60], [0.5, 0.5], 55.0),
        ([1, 2, 3], [1 / 3, 1 / 3, 1 / 3], 2.0),
    ])
    def test_v_aa(self, vals, w, expected):
        assert v_aa(vals, FusionWeights(tuple(w[:-1]) + (1 - sum(w[:-1]),))) == pytest.approx(expected)

    def test_v_ga_examples(self):
        assert v_ga([10, 10], [0.4, 0.6]) == pytest.approx(10.0)
        assert v_ga([50, 60], [0.5, 0.5]) == pytest.approx(math.sqrt(3000.0), rel=1e-12)

    @pytest.mark.parametrize("vals", [[4, -1], [0, 3]])
    def test_v_ga_rejects_non_positive(self, vals):
        with pytest.raises(ValueError, match="GA undefined for non-positive values"):
            v_ga(vals, [0.5, 0.5])

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            v_aa([1, 2, 3], [0.5, 0.5])
        with pytest.raises(ValueError):
            v_ga([1, 2, 3], [0.5, 0.5])

    @given(st.data(), st.integers(2, 6))
    def test_am_gm_and_log_identity(self, data, n):
        w = data.draw(weight_vectors(n))
        x = data.draw(st.lists(st.floats(1e-3, 1e3), min_size=n, max_size=n))
        ga, aa = v_ga(x, w), v_aa(x, w)
        assert ga <= aa * (1 + 1e-12)
        assert math.log(ga) == pytest.approx(v_aa([math.log(v) for v in x], w), abs=1e-12)
        if max(x) - min(x) > 1e-6 * max(x):
            assert ga < aa


class TestVariance:
    @pytest.mark.parametrize("s1,s2,rho,w1,expected", [
        (100, 200, 0.0, 0.5, 75.0),
        (100, 200, 0.0, 2 / 3, 200 / 3),
        (100, 100, 1 - 1e-12, 0.5, 100.0),
    ])
    def test_examples(self, s1, s2, rho, w1, expected):
        assert aa_variance_two(s1, s2, rho, FusionWeights.pair(w1)) == pytest.approx(expected, rel=1e-9)

    def test_rejects_non_positive(self):
        with pytest.raises(ValueError):
            aa_variance_two(0.0, 1.0, 0.0, [0.5, 0.5])

    def test_matrix_form_matches_pair(self):
        s1, s2, rho = 100.0, 200.0, 0.3
        c = rho * math.sqrt(s1 * s2)
        w = FusionWeights.pair(0.4)
        assert aa_variance(np.array([[s1, c], [c, s2]]), w) == pytest.approx(aa_variance_two(s1, s2, rho, w))

    def test_matrix_validation(self):
        with pytest.raises(ValueError):
            aa_variance(np.array([[1.0, 0.5], [0.4, 1.0]]), [0.5, 0.5])
        with pytest.raises(ValueError):
            aa_variance(np.array([[1.0, 2.0], [2.0, 1.0]]), [0.5, 0.5])
        with pytest.raises(ValueError):
            aa_variance(np.eye(3), [0.5, 0.5])

    @given(variances, variances, corr, weights2)
    def test_upper_bound(self, s1, s2, rho, w):
        assert aa_variance_two(s1, s2, rho, w) <= max(s1, s2) * (1 + 1e-12)

    @given(variances, variances, corr, weights2)
    def test_equals_h_times_s1(self, s1, s2, rho, w):
        expected = h_function(w[1], s2 / s1, rho) * s1
        assert aa_variance_two(s1, s2, rho, w) == pytest.approx(expected, rel=1e-9, abs=1e-9 * s1)


class TestH:
    def test_symmetric_value(self):
        assert h_function(0.5, 1.0, 0.0) == pytest.approx(0.5)

    def test_limits(self):
        assert h_function(1e-9, 3.0, 0.4) == pytest.approx(1.0, abs=1e-8)
        assert h_function(1 - 1e-9, 3.0, 0.4) == pytest.approx(3.0, abs=1e-8)

    def test_cross_check_direct_variance(self):
        assert h_function(0.5, 2.0, 0.70846) == pytest.approx(
            aa_variance_two(1.0, 2.0, 0.70846, [0.5, 0.5]), rel=1e-12)

    @pytest.mark.parametrize("w", [0.0, 1.0, -0.1, 1.2])
    def test_domain(self, w):
        with pytest.raises(ValueError):
            h_function(w, 2.0, 0.0)
        with pytest.raises(ValueError):
            h_function(np.array([0.5, w]), 2.0, 0.0)

    def test_broadcast(self):
        w = np.array([0.2, 0.5, 0.8])
        h = h_function(w, 2.0, np.array([[0.0], [0.3]]))
        assert h.shape == (2, 3)
        assert h[1, 1] == h_function(0.5, 2.0, 0.3)


class TestOptimalWeights:
    def test_inverse_variance_weights(self):
        w = optimal_aa_weights(2.0, 0.0)
        assert w[0] == pytest.approx(2 / 3) and w[1] == pytest.approx(1 / 3)

    def test_symmetric(self):
        assert optimal_aa_weights(1.0, 0.0).weights == pytest.approx((0.5, 0.5))

    def test_boundary(self):
        b = optimal_aa_weights(2.0, 0.8)
        assert isinstance(b, BoundaryOptimum)
        assert b.omega1_limit == 1.0 and b.h_limit == 1.0

    def test_threshold_exactly_is_boundary(self):
        assert isinstance(optimal_aa_weights(4.0, 0.5), BoundaryOptimum)

    def test_alpha_below_one(self):
        with pytest.raises(ValueError):
            optimal_aa_weights(0.5, 0.0)

    @given(st.floats(1.0, 10.0), st.data())
    def test_convexity_minimum(self, alpha, data):
        rho = data.draw(st.floats(-0.99, 1 / math.sqrt(alpha) - 1e-3))
        w = optimal_aa_weights(alpha, rho)
        assume(isinstance(w, FusionWeights))
        h_opt = h_function(w[1], alpha, rho)
        grid = np.random.default_rng(0).uniform(1e-6, 1 - 1e-6, 1000)
        assert np.all(h_opt <= h_function(grid, alpha, rho) + 1e-12)

    @given(variances, st.floats(1.0, 10.0), st.data())
    def test_lower_bound_consistency(self, s1, alpha, data):
        rho = data.draw(st.floats(-0.99, 1 / math.sqrt(alpha) - 1e-3))
        w = optimal_aa_weights(alpha, rho)
        assume(isinstance(w, FusionWeights))
        s2 = alpha * s1
        assert aa_variance_two(s1, s2, rho, w) == pytest.approx(
            aa_variance_lower_bound(s1, s2, rho), rel=1e-9)


class TestLowerBound:
    @pytest.mark.parametrize("s1,s2,rho,expected", [
        (100, 200, 0.0, 200 / 3),
        (100, 200, 0.9, 100.0),
        (100, 100, 0.0, 50.0),
        (200, 100, 0.0, 200 / 3),
    ])
    def test_examples(self, s1, s2, rho, expected):
        assert aa_variance_lower_bound(s1, s2, rho) == pytest.approx(expected)

    @given(variances, variances, corr, weights2)
    def test_is_a_lower_bound(self, s1, s2, rho, w):
        assert aa_variance_two(s1, s2, rho, w) >= aa_variance_lower_bound(s1, s2, rho) * (1 - 1e-9)


class TestMse:
    @pytest.mark.parametrize("m1,m2,beta,w1,expected", [
        (125, 225, 0.0, 0.5, 87.5),
        (100, 100, 1 - 1e-12, 0.5, 100.0),
        (100, 400, 0.0, 0.8, 80.0),
    ])
    def test_examples(self, m1, m2, beta, w1, expected):
        assert aa_mse_two(m1, m2, beta, FusionWeights.pair(w1)) == pytest.approx(expected, rel=1e-9)

    def test_rejects(self):
        with pytest.raises(ValueError):
            aa_mse_two(-1.0, 1.0, 0.0, [0.5, 0.5])
        with pytest.raises(ValueError):
            aa_mse_two(1.0, 1.0, 1.0, [0.5, 0.5])
        with pytest.raises(ValueError):
            aa_mse_two(1.0, 1.0, 0.0, [0.2, 0.3, 0.5])

    @given(variances, variances, corr, weights2)
    def test_upper_bound(self, m1, m2, beta, w):
        assert aa_mse_two(m1, m2, beta, w) <= max(m1, m2) * (1 + 1e-12)

    @given(variances, variances, corr)
    def test_optimum_beats_best_iff(self, m1, m2, beta):
        lo, hi = min(m1, m2), max(m1, m2)
        assume(hi / lo > 1 + 1e-6)
        # skip a thin band around the switching point where rounding decides
        assume(abs(beta - math.sqrt(lo / hi)) > 1e-6)
        w = optimal_aa_weights(hi / lo, beta)
        below = isinstance(w, FusionWeights) and aa_mse_two(lo, hi, beta, w) < lo
        assert below == (beta < math.sqrt(lo / hi))
        assert aa_mse_lower_bound(m1, m2, beta) <= lo


class TestUnweighted:
    def test_examples(self):
        assert unweighted_aa_beats_best(1.0, 0.0)
        assert unweighted_gain_threshold(9.0) == pytest.approx(-1.0)
        assert not unweighted_aa_beats_best(9.0, -0.99)
        assert not unweighted_aa_beats_best(10.0, -0.99)
        grid = unweighted_aa_beats_best(np.array([1.0, 10.0]), 0.0)
        assert grid.tolist() == [True, False]

    def test_gamma_below_one(self):
        with pytest.raises(ValueError):
            unweighted_aa_beats_best(0.5, 0.0)

    @given(st.floats(1.0, 50.0), corr, st.floats(0.1, 1e3))
    def test_matches_direct_comparison(self, gamma, beta, m1):
        g = unweighted_gain_threshold(gamma)
        assume(abs(beta - g) > 1e-9)
        direct = aa_mse_two(m1, gamma * m1, beta, [0.5, 0.5]) < m1
        assert unweighted_aa_beats_best(gamma, beta) == direct
