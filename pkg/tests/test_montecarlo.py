import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from avgfusion.core import TruthContext
from avgfusion.montecarlo import (
    CorrelatedPairSpec,
    calibrate_poisson_copula,
    norta_poisson_correlation,
    sample_pairs,
    stream,
    sweep_samples,
    sweep_weights,
    weight_grid,
)
from avgfusion.vfusion import aa_variance_two

FIG1 = ((50.0, 100.0), (60.0, 200.0))


def gauss(rho=0.0, n=10_000, seed=0):
    return CorrelatedPairSpec("truncated_gaussian", *FIG1, target_rho=rho, n_samples=n, seed=seed)


def poisson(rho=0.0, n=10_000, seed=0, l1=12.0, l2=10.0):
    return CorrelatedPairSpec("poisson", (l1,), (l2,), target_rho=rho, n_samples=n, seed=seed)


class TestSpec:
    @pytest.mark.parametrize("kwargs", [
        dict(family="cauchy", params1=(1.0,), params2=(1.0,)),
        dict(family="poisson", params1=(0.0,), params2=(1.0,)),
        dict(family="truncated_gaussian", params1=(1.0, -1.0), params2=(1.0, 1.0)),
        dict(family="truncated_gaussian", params1=(1.0, 1.0), params2=(1.0, 1.0), n_samples=100),
        dict(family="truncated_gaussian", params1=(1.0, 1.0), params2=(1.0, 1.0), target_rho=1.0),
        dict(family="truncated_gaussian", params1=(1.0, 1.0), params2=(1.0, 1.0), seed=-1),
    ])
    def test_rejects(self, kwargs):
        with pytest.raises(ValueError):
            CorrelatedPairSpec(**kwargs)

    def test_moments_properties(self):
        assert gauss().variances == (100.0, 200.0)
        assert poisson().means == (12.0, 10.0)


class TestSampling:
    def test_deterministic(self):
        a = sample_pairs(gauss(0.3, seed=11))
        b = sample_pairs(gauss(0.3, seed=11))
        assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1]) and a[2] == b[2]

    def test_seed_changes_stream(self):
        assert not np.array_equal(sample_pairs(gauss(seed=1))[0], sample_pairs(gauss(seed=2))[0])

    def test_substreams_independent(self):
        assert not np.array_equal(stream(5, 0).random(8), stream(5, 1).random(8))
        assert np.array_equal(stream(5, 3).random(8), stream(5, 3).random(8))

    def test_gaussian_positive(self):
        x1, x2, _ = sample_pairs(CorrelatedPairSpec("truncated_gaussian", (2.0, 4.0), (1.0, 4.0), 0.5, 20_000))
        assert x1.size == x2.size == 20_000
        assert (x1 > 0).all() and (x2 > 0).all()

    @pytest.mark.slow
    def test_gaussian_fig1_moments(self):
        x1, x2, rho = sample_pairs(gauss(0.0, n=1_000_000))
        assert abs(x1.mean() - 50) < 0.1 and abs(x2.mean() - 60) < 0.15
        assert abs(rho) < 0.005

    @pytest.mark.slow
    def test_poisson_moments(self):
        x1, x2, rho = sample_pairs(poisson(0.0, n=1_000_000))
        assert abs(x1.mean() - 12) < 0.05 and abs(x2.mean() - 10) < 0.05
        assert abs(x1.var() - 12) < 0.2 and abs(x2.var() - 10) < 0.2
        assert abs(rho) < 0.005

    def test_poisson_integer_positive(self):
        x1, x2, _ = sample_pairs(poisson(0.4))
        assert (x1 >= 1).all() and (x2 >= 1).all()
        assert np.array_equal(x1, np.round(x1))

    def test_poisson_calibration_hits_target(self):
        r = calibrate_poisson_copula(12.0, 10.0, 0.5)
        assert r > 0.5  # discrete margins attenuate correlation
        assert norta_poisson_correlation(12.0, 10.0, r) == pytest.approx(0.5, abs=1e-8)
        _, _, achieved = sample_pairs(poisson(0.5, n=200_000))
        assert achieved == pytest.approx(0.5, abs=0.01)

    def test_poisson_infeasible_reports_range(self):
        with pytest.raises(ValueError, match="attainable range"):
            sample_pairs(poisson(0.999))

    @settings(max_examples=15)
    @given(st.floats(-0.9, 0.9))
    def test_norta_monotone(self, r):
        a = norta_poisson_correlation(3.0, 5.0, r)
        b = norta_poisson_correlation(3.0, 5.0, min(r + 0.05, 1.0))
        assert b > a
        assert abs(a) <= abs(r) + 1e-9


class TestSweep:
    def test_grid(self):
        g = weight_grid(99)
        assert g[0] == pytest.approx(0.01) and g[-1] == pytest.approx(0.99) and g.size == 99
        with pytest.raises(ValueError):
            weight_grid(2)

    def test_shapes_and_am_gm(self):
        res = sweep_weights(gauss(0.3), TruthContext(55.0), grid_size=9)
        assert len(res) == 9
        for arr in (res.aa_mean, res.aa_var, res.ga_mean, res.ga_var, res.aa_mse, res.ga_mse):
            assert arr.shape == (9,)
        assert np.all(res.ga_mean <= res.aa_mean)
        assert -1 < res.achieved_rho < 1

    def test_endpoints_approach_sources(self):
        res = sweep_weights(gauss(0.0, n=50_000), TruthContext(55.0), grid_size=999)
        assert res.aa_var[-1] == pytest.approx(res.var1, rel=0.01)
        assert res.aa_var[0] == pytest.approx(res.var2, rel=0.01)

    def test_mse_identity_on_samples(self):
        res = sweep_weights(gauss(0.2), TruthContext(45.0), grid_size=9)
        bias = res.aa_mean - 45.0
        np.testing.assert_allclose(res.aa_mse, res.aa_var + bias ** 2, rtol=1e-9)

    def test_sweep_samples_equals_sweep_weights(self):
        spec = gauss(0.1)
        x1, x2, rho = sample_pairs(spec)
        a = sweep_samples(x1, x2, TruthContext(50.0), 5)
        b = sweep_weights(spec, TruthContext(50.0), 5)
        assert np.array_equal(a.ga_var, b.ga_var) and a.achieved_rho == b.achieved_rho

    @pytest.mark.slow
    def test_closed_form_agreement_and_crossover(self):
        res = sweep_weights(gauss(0.0, n=1_000_000, seed=1), TruthContext(55.0))
        # nominal variances; truncation at >4 sigma is negligible
        expected = np.array([aa_variance_two(100.0, 200.0, res.achieved_rho, (w, 1 - w))
                             for w in res.weights_grid])
        assert np.all(np.abs(res.aa_var - expected) <= 3 * res.aa_var_se + 1e-9)
        diff = np.sign(res.aa_var - res.ga_var)
        assert np.any(diff > 0) and np.any(diff < 0)
        k = int(np.argmin(res.aa_var))
        assert res.aa_var.min() <= res.ga_var.min() + 3 * res.ga_var_se[k]

    def test_mse_floor(self):
        res = sweep_weights(gauss(0.0, n=50_000), TruthContext(70.0), grid_size=19)
        k = int(np.argmin(res.aa_mse))
        assert res.aa_mse[k] >= res.aa_var[k] - 3 * res.aa_var_se[k]
