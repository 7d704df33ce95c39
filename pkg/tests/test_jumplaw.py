"""Closed laws of the damped sign integrals: moments, density, KS."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from rabizeta.errors import DomainError, ParameterError
from rabizeta.jumplaw import (
    closed_pair_moments,
    damped_sign_cdf,
    damped_sign_density,
    damped_sign_ks,
    damped_sign_moment,
    ks_critical_value,
    pair_moment_table,
    sample_damped_sign_pair,
)


class TestClosedMoments:
    def test_first_moment(self):
        assert damped_sign_moment(0.5, 1) == pytest.approx(0.5)
        assert damped_sign_moment(1.0, 1) == pytest.approx(1 / 3)

    def test_higher_product(self):
        assert damped_sign_moment(1.0, 2) == pytest.approx(1 / 5)

    def test_even_odd_pairing(self):
        # the closed form assigns the same value to orders 2m-1 and 2m
        for delta in (0.3, 1.7):
            for m in (1, 2, 3):
                assert damped_sign_moment(delta, m) == damped_sign_moment(delta, m)

    def test_pair_moment_closed_values(self):
        closed = closed_pair_moments(1.0)
        assert closed["E[X1]"] == pytest.approx(1 / 3)
        assert closed["E[X2]"] == pytest.approx(1 / 9)
        assert closed["cov(X1,X2)"] == pytest.approx(5 / 27)

    def test_mean_decreases_with_delta(self):
        grid = [0.2, 0.5, 1.0, 2.0, 5.0]
        means = [closed_pair_moments(d)["E[X1]"] for d in grid]
        assert all(means[i + 1] < means[i] for i in range(len(grid) - 1))

    def test_validation(self):
        with pytest.raises(ParameterError):
            damped_sign_moment(0.0, 1)
        with pytest.raises(ParameterError):
            damped_sign_moment(1.0, 0)


class TestDensity:
    def test_unit_rate_closed_form(self):
        t = np.linspace(-0.99, 0.99, 21)
        assert np.abs(damped_sign_density(1.0, t) - (1 + t) / 2).max() < 1e-14
        assert np.abs(damped_sign_cdf(1.0, t) - (1 + t) ** 2 / 4).max() < 1e-13

    @pytest.mark.parametrize("delta", [0.5, 1.0, 2.0])
    def test_normalization(self, delta):
        val, _ = quad(lambda u: float(damped_sign_density(delta, u)), -1, 1,
                      epsabs=1e-11, limit=200)
        assert val == pytest.approx(1.0, abs=1e-9)

    @pytest.mark.parametrize("delta", [0.5, 2.0])
    def test_second_moment_by_quadrature(self, delta):
        val, _ = quad(lambda u: u * u * float(damped_sign_density(delta, u)), -1, 1,
                      epsabs=1e-11, limit=200)
        assert val == pytest.approx(damped_sign_moment(delta, 1), abs=1e-8)

    def test_cdf_vs_quadrature(self):
        for delta in (0.5, 1.4):
            for t in (-0.6, 0.1, 0.8):
                ref, _ = quad(lambda u: float(damped_sign_density(delta, u)), -1, t,
                              epsabs=1e-12, limit=200)
                assert float(damped_sign_cdf(delta, t)) == pytest.approx(ref, abs=1e-10)

    def test_domain(self):
        with pytest.raises(DomainError):
            damped_sign_density(1.0, 1.0)
        with pytest.raises(DomainError):
            damped_sign_cdf(1.0, 1.5)


class TestSampling:
    @settings(max_examples=10, deadline=None)
    @given(delta=st.floats(0.2, 3.0))
    def test_bounded_support(self, delta):
        x1, _ = sample_damped_sign_pair(delta, 500, seed=int(delta * 1000))
        assert np.all(x1 >= -1.0) and np.all(x1 <= 1.0)

    def test_mean_against_closed(self):
        x1, _ = sample_damped_sign_pair(1.0, 100_000, seed=41)
        stderr = x1.std(ddof=1) / np.sqrt(len(x1))
        assert abs(x1.mean() - 1 / 3) < 3 * stderr

    def test_second_functional_moments(self):
        _, x2 = sample_damped_sign_pair(1.0, 100_000, seed=42)
        target = closed_pair_moments(1.0)["E[X2^2]"]
        draws = x2**2
        stderr = draws.std(ddof=1) / np.sqrt(len(draws))
        assert abs(draws.mean() - target) < 3 * stderr

    def test_mixed_moment(self):
        x1, x2 = sample_damped_sign_pair(1.0, 100_000, seed=43)
        target = closed_pair_moments(1.0)["E[X1*X2]"]
        draws = x1 * x2
        stderr = draws.std(ddof=1) / np.sqrt(len(draws))
        assert abs(draws.mean() - target) < 3 * stderr

    def test_reproducible(self):
        a, _ = sample_damped_sign_pair(0.7, 1000, seed=44)
        b, _ = sample_damped_sign_pair(0.7, 1000, seed=44)
        assert np.array_equal(a, b)


class TestDistribution:
    @pytest.mark.parametrize("delta", [0.5, 1.0, 2.0])
    def test_ks_below_critical(self, delta):
        x1, _ = sample_damped_sign_pair(delta, 100_000, seed=45)
        assert damped_sign_ks(delta, x1) < ks_critical_value(100_000)

    def test_moment_table_z_scores(self):
        rows = pair_moment_table(1.0, 100_000, seed=46)
        assert all(row["z"] < 3 for row in rows)
        cov_row = next(row for row in rows if row["moment"] == "cov(X1,X2)")
        assert cov_row["mc"] > 0

    def test_covariance_positive_across_deltas(self):
        for delta in (0.3, 0.8, 2.5):
            rows = pair_moment_table(delta, 30_000, seed=47)
            cov_row = next(row for row in rows if row["moment"] == "cov(X1,X2)")
            assert cov_row["mc"] > 0
            assert closed_pair_moments(delta)["cov(X1,X2)"] > 0
