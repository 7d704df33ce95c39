"""Jump-path estimators against exact diagonalization and closed limits."""

import numpy as np
import pytest

from rabizeta.errors import DomainError, ParameterError
from rabizeta.estimators import (
    gaussian_square_fk,
    gibbs_number_fk,
    ground_energy_fk,
    number_moments_fk,
    partition_fk,
    resolvent_cross_moment_fk,
    spin_correlation_fk,
    stirling2,
    vacuum_element_fk,
    x_characteristic_fk,
)
from rabizeta.model import ModelParams
from rabizeta.observables import (
    gibbs_number_ed,
    ground_state,
    number_moment_ed,
    partition_ed,
    resolvent_spin_norm,
    spin_autocorrelation_ed,
    vacuum_element_ed,
    x_characteristic_ed,
    x_square_exponential_ed,
)
from rabizeta.paths import build_ground_ensemble

P_STD = ModelParams(0.5, 1.0)
N = 40_000
SEED = 7


@pytest.fixture(scope="module")
def gs():
    return ground_state(P_STD)


@pytest.fixture(scope="module")
def ens():
    return build_ground_ensemble(P_STD, N, seed=SEED)


class TestVacuumElement:
    def test_uncoupled_mean(self):
        p = ModelParams(0.5, 0.0)
        est = vacuum_element_fk(p, 1.0, 40_000, seed=1)
        assert est.z_score(2 * np.exp(0.5)) < 3

    def test_strong_coupling_limit(self):
        # only jump-free paths survive: the estimate approaches 2
        est = vacuum_element_fk(ModelParams(0.5, 40.0), 1.0, 40_000, seed=2)
        assert est.z_score(2.0) < 3

    def test_matches_ed(self):
        est = vacuum_element_fk(P_STD, 1.0, N, seed=3)
        assert est.z_score(vacuum_element_ed(P_STD, 1.0)) < 3

    def test_weights_positive(self):
        est = vacuum_element_fk(P_STD, 1.0, 2000, seed=4)
        assert est.real > 0

    def test_bad_time(self):
        with pytest.raises(DomainError):
            vacuum_element_fk(P_STD, 0.0, 100)


class TestPartition:
    def test_uncoupled_zero_variance(self):
        est = partition_fk(ModelParams(0.5, 0.0), 1.0, 1000, seed=5)
        assert est.mean == pytest.approx(2 * np.exp(0.5), abs=1e-12)
        assert est.stderr == 0.0

    def test_jump_free_weight(self):
        # a path with no jumps carries weight exp(g^2 (t - 1 + e^{-t}))
        p = ModelParams(1e-9, 1.0)  # jump-free with overwhelming probability
        t = 2.0
        est = partition_fk(p, t, 50, seed=6)
        expected = 2 * np.exp(p.delta * t) * np.exp(p.g**2 * (t - 1 + np.exp(-t)))
        assert est.mean == pytest.approx(expected, rel=1e-9)

    def test_matches_ed(self):
        est = partition_fk(P_STD, 2.0, N, seed=7)
        assert est.z_score(partition_ed(P_STD, 2.0)) < 3


class TestGroundEnergy:
    def test_uncoupled_exact(self):
        est = ground_energy_fk(ModelParams(0.5, 0.0), [4.0, 8.0], 2000, seed=8)
        assert est.mean == pytest.approx(-0.5, abs=1e-12)
        assert est.stderr == 0.0

    def test_delta_zero_shift(self):
        # deterministic single-path estimator approaches -g^2 at large horizons
        est = ground_energy_fk(ModelParams(0.0, 1.0), [20.0, 30.0], 10, seed=9)
        assert est.mean == pytest.approx(-1.0, abs=1e-4)

    def test_matches_ed(self, gs):
        est = ground_energy_fk(P_STD, [4.0, 6.0, 8.0, 10.0], N, seed=10)
        assert est.z_score(gs.energy) < 3
        assert len(est.extras["series"]) == 4

    def test_needs_two_horizons(self):
        with pytest.raises(ParameterError):
            ground_energy_fk(P_STD, [4.0], 100)


class TestEnsembleEstimators:
    def test_gibbs_trivial_exact(self, ens):
        est = gibbs_number_fk(ens, P_STD, 0.0)
        assert est.mean == pytest.approx(1.0, abs=1e-14)
        assert est.stderr == 0.0

    def test_gibbs_matches_ed(self, ens, gs):
        est = gibbs_number_fk(ens, P_STD, -0.5)
        assert est.z_score(gibbs_number_ed(gs, -0.5)) < 3

    def test_number_parity_positive_real(self, ens, gs):
        est = gibbs_number_fk(ens, P_STD, 1j * np.pi)
        assert abs(np.imag(est.mean)) < 1e-12
        assert np.real(est.mean) > 0
        assert est.z_score(gibbs_number_ed(gs, 1j * np.pi)) < 3

    def test_moments_match_ed(self, ens, gs):
        for m in (1, 2):
            est = number_moments_fk(ens, P_STD, m)
            assert est.z_score(number_moment_ed(gs, m)) < 3

    def test_first_moment_bounded_by_coupling(self, ens):
        # |cross integral| <= 1 per path forces <n> <= g^2
        est = number_moments_fk(ens, P_STD, 1)
        assert np.real(est.mean) <= P_STD.g**2

    def test_moments_vanish_uncoupled(self):
        p = ModelParams(0.5, 0.0)
        free = build_ground_ensemble(p, 2000, T=6.0, seed=11)
        est = number_moments_fk(free, p, 1)
        assert est.mean == pytest.approx(0.0, abs=1e-15)

    def test_bad_moment_order(self, ens):
        with pytest.raises(ParameterError):
            number_moments_fk(ens, P_STD, 0)

    def test_x_characteristic(self, ens, gs):
        est = x_characteristic_fk(ens, P_STD, 1.0)
        assert est.z_score(x_characteristic_ed(gs, 1.0)) < 3
        trivial = x_characteristic_fk(ens, P_STD, 0.0)
        assert trivial.mean == pytest.approx(1.0, abs=1e-14)

    def test_x_characteristic_uncoupled(self):
        p = ModelParams(0.5, 0.0)
        free = build_ground_ensemble(p, 500, T=6.0, seed=12)
        est = x_characteristic_fk(free, p, 1.3)
        assert est.mean == pytest.approx(np.exp(-1.3**2 / 4), abs=1e-14)
        assert est.stderr == 0.0

    def test_gaussian_square(self, ens, gs):
        est = gaussian_square_fk(ens, P_STD, 0.5)
        assert est.z_score(x_square_exponential_ed(gs, 0.5)) < 3

    def test_gaussian_square_uncoupled(self):
        p = ModelParams(0.5, 0.0)
        free = build_ground_ensemble(p, 500, T=6.0, seed=13)
        est = gaussian_square_fk(free, p, 0.5)
        assert est.mean == pytest.approx(1 / np.sqrt(0.5), abs=1e-14)

    def test_gaussian_square_domain(self, ens):
        with pytest.raises(DomainError):
            gaussian_square_fk(ens, P_STD, 1.0)

    def test_spin_correlation_equal_times(self, ens):
        est = spin_correlation_fk(ens, 0.8, 0.8)
        assert est.mean == pytest.approx(1.0, abs=1e-14)
        assert est.stderr == 0.0

    def test_spin_correlation_matches_ed(self, ens, gs):
        for lag in (0.5, 1.0):
            est = spin_correlation_fk(ens, lag / 2, -lag / 2)
            assert est.z_score(spin_autocorrelation_ed(gs, lag)) < 3

    def test_spin_correlation_shift_invariant(self, ens):
        base = spin_correlation_fk(ens, 0.5, -0.5)
        shifted = spin_correlation_fk(ens, 1.5, 0.5)
        combined = np.hypot(base.stderr, shifted.stderr)
        assert abs(np.real(base.mean - shifted.mean)) < 3 * combined

    def test_spin_correlation_guard(self, ens):
        with pytest.raises(DomainError):
            spin_correlation_fk(ens, ens.half_width, 0.0)

    def test_resolvent_cross_moment(self, ens, gs):
        est = resolvent_cross_moment_fk(ens)
        assert est.z_score(resolvent_spin_norm(gs)) < 3


class TestReproducibility:
    def test_bitwise_identical(self):
        a = vacuum_element_fk(P_STD, 1.0, 5000, seed=31)
        b = vacuum_element_fk(P_STD, 1.0, 5000, seed=31)
        assert (a.mean, a.stderr) == (b.mean, b.stderr)

    def test_seed_changes_stream(self):
        a = vacuum_element_fk(P_STD, 1.0, 5000, seed=31)
        b = vacuum_element_fk(P_STD, 1.0, 5000, seed=32)
        assert a.mean != b.mean


class TestStirling:
    def test_small_table(self):
        assert stirling2(1, 1) == 1
        assert stirling2(2, 1) == 1 and stirling2(2, 2) == 1
        assert stirling2(3, 2) == 3
        assert stirling2(4, 2) == 7

    def test_row_sums_are_bell_numbers(self):
        bell = [1, 1, 2, 5, 15, 52]
        for m in range(1, 6):
            assert sum(stirling2(m, l) for l in range(m + 1)) == bell[m]

    def test_moment_expansion_matches_poisson(self):
        # sum_l S(m,l) lam^l equals the m-th moment of a Poisson(lam) count
        rng = np.random.default_rng(0)
        lam, m = 0.7, 3
        closed = sum(stirling2(m, l) * lam**l for l in range(m + 1))
        draws = rng.poisson(lam, 400_000).astype(float) ** m
        assert closed == pytest.approx(draws.mean(), rel=0.02)
