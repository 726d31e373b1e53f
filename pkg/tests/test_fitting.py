import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mmwchan import distributions as d


class TestFitMle:
    def test_degenerate_rejected(self):
        with pytest.raises(d.FitError):
            d.fit_mle(d.Family.GEV, np.full(100, 7.0))

    def test_too_few_samples(self):
        with pytest.raises(ValueError):
            d.fit_mle(d.Family.GEV, np.arange(10.0))

    def test_gev_recovery(self):
        truth = d.gev(0.5, 2.0, 2.0)
        fit = d.fit_mle(d.Family.GEV, d.sample(truth, 100_000, seed=7))
        for got, want in zip(fit.params, truth.params):
            assert got == pytest.approx(want, rel=0.05)

    def test_gamma_recovery(self):
        truth = d.gamma(2.0, 3.0)
        fit = d.fit_mle(d.Family.GAMMA, d.sample(truth, 100_000, seed=7))
        for got, want in zip(fit.params, truth.params):
            assert got == pytest.approx(want, rel=0.05)

    def test_gpd_location_rule_continuous(self):
        x = d.sample(d.gpd(0.2, 1.0, 5.0), 5000, seed=3)
        fit = d.fit_mle(d.Family.GPD, x)
        eps = 1e-6 * (x.max() - x.min())
        assert fit.params[2] == pytest.approx(x.min() - eps, abs=1e-12)

    def test_gpd_location_rule_counts(self):
        x = np.round(d.sample(d.gpd(-0.3, 3.0, 1.0), 5000, seed=3))
        x = np.maximum(x, 1.0)
        fit = d.fit_mle(d.Family.GPD, x)
        assert fit.params[2] == 1.0

    def test_gpd_explicit_location(self):
        x = d.sample(d.gpd(0.2, 1.0, 5.0), 5000, seed=3)
        fit = d.fit_mle(d.Family.GPD, x, gpd_location=4.5)
        assert fit.params[2] == 4.5

    def test_nonconvergence_carries_best(self):
        x = d.sample(d.gev(0.4, 1.0, 0.0), 2000, seed=5)
        with pytest.raises(d.FitError) as err:
            d.fit_mle(d.Family.GEV, x, maxiter=2)
        assert err.value.best is not None
        assert err.value.best.family is d.Family.GEV

    def test_gamma_rejects_nonpositive(self):
        with pytest.raises(d.FitError):
            d.fit_mle(d.Family.GAMMA, np.linspace(-1, 5, 60))

    def test_point_mass_not_fittable(self):
        with pytest.raises(ValueError):
            d.fit_mle(d.Family.POINT_MASS, np.arange(30.0))

    def test_gev_affine_equivariance(self):
        # fitting a*x + b shifts location/scale, leaves shape alone
        x = d.sample(d.gev(0.4, 2.0, 1.0), 100_000, seed=11)
        base = d.fit_mle(d.Family.GEV, x)
        a, b = 3.0, -2.0
        moved = d.fit_mle(d.Family.GEV, a * x + b)
        assert moved.params[0] == pytest.approx(base.params[0], abs=0.02 * max(1, abs(base.params[0])))
        assert moved.params[1] == pytest.approx(a * base.params[1], rel=0.02)
        assert moved.params[2] == pytest.approx(a * base.params[2] + b, rel=0.02)


class TestKsStatistic:
    def test_requires_samples(self):
        with pytest.raises(ValueError):
            d.ks_statistic([], d.gamma(2.0, 1.0))

    def test_plotting_positions_exact(self):
        # samples at quantiles of (i - 0.5)/n leave half-step gaps
        spec = d.gamma(2.0, 3.0)
        for n in (1, 5, 40, 173):
            p = (np.arange(1, n + 1) - 0.5) / n
            samples = d.quantile(spec, p)
            # oracle: enumerate both one-sided gaps directly
            f = np.asarray(d.cdf(spec, np.sort(samples)))
            i = np.arange(1, n + 1)
            oracle = max(np.max(i / n - f), np.max(f - (i - 1) / n))
            got = d.ks_statistic(samples, spec)
            assert got == pytest.approx(oracle, abs=1e-15)
            assert got == pytest.approx(0.5 / n, abs=1e-12)

    def test_single_sample_at_median(self):
        spec = d.gamma(2.0, 3.0)
        assert d.ks_statistic([d.quantile(spec, 0.5)], spec) == pytest.approx(0.5, abs=1e-12)

    def test_own_samples_small_distance(self):
        spec = d.gev(0.4, 1.0, 0.0)
        s = d.sample(spec, 100_000, seed=2)
        assert d.ks_statistic(s, spec) < 0.01

    @given(perm_seed=st.integers(min_value=0, max_value=1000))
    @settings(max_examples=25, deadline=None)
    def test_permutation_invariance(self, perm_seed):
        spec = d.gamma(2.0, 1.0)
        x = d.sample(spec, 100, seed=4)
        shuffled = np.random.default_rng(perm_seed).permutation(x)
        assert d.ks_statistic(shuffled, spec) == d.ks_statistic(x, spec)


class TestSelectFamily:
    def test_requires_candidates_and_samples(self):
        x = d.sample(d.gamma(2.0, 1.0), 100, seed=1)
        with pytest.raises(ValueError):
            d.select_family(x, [d.Family.GEV])
        with pytest.raises(ValueError):
            d.select_family(x[:10], [d.Family.GEV, d.Family.GAMMA])

    def test_all_degenerate_raises(self):
        with pytest.raises(d.SelectionError):
            d.select_family(np.full(100, 2.0), [d.Family.GEV, d.Family.GAMMA])

    def test_gev_wins_on_gev_data(self):
        x = d.sample(d.gev(0.6, 2.0, 2.0), 10_000, seed=42)
        chosen, scores = d.select_family(x, [d.Family.GEV, d.Family.GPD, d.Family.GAMMA])
        assert chosen.family is d.Family.GEV
        assert scores[d.Family.GEV] == min(v for v in scores.values() if not math.isnan(v))

    def test_gamma_wins_on_gamma_data_majority(self):
        # gamma(9) is close to Gaussian, so GEV occasionally noses ahead;
        # the claim is a majority across seeds (the full 100-seed protocol
        # runs in the acceptance suite)
        wins = 0
        for seed in range(15):
            x = d.sample(d.gamma(9.0, 1.0), 10_000, seed=seed)
            chosen, _ = d.select_family(x, [d.Family.GEV, d.Family.GAMMA])
            wins += chosen.family is d.Family.GAMMA
        assert wins > 7

    def test_score_table_covers_all_candidates(self):
        x = d.sample(d.gamma(3.0, 2.0), 500, seed=9)
        _, scores = d.select_family(
            x, [d.Family.GEV, d.Family.GPD, d.Family.GAMMA, d.Family.INVERSE_GAUSSIAN]
        )
        assert set(scores) == {
            d.Family.GEV,
            d.Family.GPD,
            d.Family.GAMMA,
            d.Family.INVERSE_GAUSSIAN,
        }
