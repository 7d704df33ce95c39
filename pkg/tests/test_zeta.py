"""Hurwitz evaluation against an independent oracle; spectral zeta identities."""

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rabizeta.errors import ConvergenceError, DomainError, ParameterError
from rabizeta.model import ModelParams, Spectrum, adaptive_spectrum
from rabizeta.zeta import (
    eigenvalue_limit_table,
    hurwitz_zeta,
    spectral_zeta,
    variant_target,
    zeta_limit_table,
    zeta_variant_value,
)


def mp_hurwitz(s: complex, tau: float) -> complex:
    return complex(mpmath.zeta(mpmath.mpc(s.real, s.imag), tau))


class TestHurwitz:
    def test_basel(self):
        assert hurwitz_zeta(2, 1).value == pytest.approx(np.pi**2 / 6, abs=1e-13)

    def test_odd_reciprocal_squares(self):
        assert hurwitz_zeta(2, 0.5).value == pytest.approx(np.pi**2 / 2, abs=1e-12)

    def test_continuation_special_value(self):
        for tau in (0.2, 1.0, 3.7):
            assert hurwitz_zeta(0, tau).value.real == pytest.approx(0.5 - tau, abs=1e-11)

    def test_riemann_even_values(self):
        targets = {2: np.pi**2 / 6, 3: 1.2020569031595942854, 4: np.pi**4 / 90}
        for s, ref in targets.items():
            assert abs(hurwitz_zeta(s, 1.0).value - ref) < 1e-12

    def test_pole_and_domain(self):
        with pytest.raises(DomainError):
            hurwitz_zeta(1.0, 1.0)
        with pytest.raises(DomainError):
            hurwitz_zeta(2.0, 0.0)

    @settings(max_examples=60, deadline=None)
    @given(
        sr=st.floats(-18, 18),
        si=st.floats(-10, 10),
        tau=st.floats(0.05, 10),
    )
    def test_against_mpmath(self, sr, si, tau):
        s = complex(sr, si)
        if abs(s - 1) < 0.05:
            return
        ours = hurwitz_zeta(s, tau).value
        ref = mp_hurwitz(s, tau)
        assert abs(ours - ref) <= 1e-11 * max(1.0, abs(ref))

    @settings(max_examples=30, deadline=None)
    @given(sr=st.floats(1.1, 15), si=st.floats(0.1, 10), tau=st.floats(0.1, 5))
    def test_conjugation_symmetry(self, sr, si, tau):
        plus = hurwitz_zeta(complex(sr, si), tau).value
        minus = hurwitz_zeta(complex(sr, -si), tau).value
        assert abs(plus - np.conj(minus)) < 1e-12 * max(1.0, abs(plus))


@pytest.fixture(scope="module")
def free_spectrum():
    return adaptive_spectrum(ModelParams(0.25, 0.0), k=1200, rel_tol=1e-10)


class TestSpectralZeta:
    def test_decoupled_exact(self):
        # delta = 0: the value is exactly twice the Hurwitz target, zero bound
        zv = zeta_variant_value(ModelParams(0.0, 2.0), 2.0, 1.0, "full", 1500)
        assert abs(zv.value - 2 * hurwitz_zeta(2, 1).value) < 1e-10
        assert zv.tail_bound == 0.0

    def test_free_splitting_identity(self, free_spectrum):
        zv = spectral_zeta(free_spectrum, 2.0, 1.0, 0.0, radius=0.25, degeneracy=2)
        target = hurwitz_zeta(2, 1.25).value + hurwitz_zeta(2, 0.75).value
        assert abs(zv.value - target) < 1e-8

    def test_deviation_decreases_with_g(self):
        target = 2 * hurwitz_zeta(2, 1).value
        devs = []
        for g in (2.0, 4.0, 6.0, 8.0):
            zv = zeta_variant_value(ModelParams(0.5, g), 2.0, 1.0, "full", 1200)
            devs.append(abs(zv.value - target))
        assert all(devs[i + 1] < devs[i] for i in range(3))

    def test_tail_bound_monotone_in_head(self, free_spectrum):
        bounds = [
            spectral_zeta(free_spectrum, 2.0, 1.0, 0.0, radius=0.25, n_use=n).tail_bound
            for n in (200, 400, 800)
        ]
        assert bounds[0] > bounds[1] > bounds[2]

    def test_conjugate_s_conjugate_value(self, free_spectrum):
        a = spectral_zeta(free_spectrum, 2 + 1j, 1.0, 0.0, radius=0.25).value
        b = spectral_zeta(free_spectrum, 2 - 1j, 1.0, 0.0, radius=0.25).value
        assert abs(a - np.conj(b)) < 1e-12

    def test_domain_errors(self, free_spectrum):
        with pytest.raises(DomainError):
            spectral_zeta(free_spectrum, 0.5, 1.0, 0.0, radius=0.25)
        with pytest.raises(DomainError):
            spectral_zeta(free_spectrum, 2.0, -1.0, 0.0, radius=0.25)

    def test_insufficient_levels(self):
        tiny = Spectrum(np.array([0.5, 1.5]), converged_count=2)
        with pytest.raises(ConvergenceError):
            spectral_zeta(tiny, 2.0, 1.0, 0.0, radius=0.5, max_tail_bound=1e-12)

    def test_doubly_degenerate_integer_ladder(self):
        # the uncoupled reference spectrum {0,0,1,1,...} gives 2 zeta(s;tau)
        ladder = Spectrum(np.repeat(np.arange(300, dtype=float), 2), converged_count=600)
        for s, tau in ((2.0, 1.0), (3.0, 0.5)):
            zv = spectral_zeta(ladder, s, tau, 0.0, radius=0.0)
            assert abs(zv.value - 2 * hurwitz_zeta(s, tau).value) <= max(zv.tail_bound, 1e-12)


class TestLimitTables:
    def test_full_rows_and_slack_certified_monotone(self):
        rows = zeta_limit_table(ModelParams(0.5, 0.0), 2.0, 1.0, [2, 4, 6, 8], "full")
        assert [r.g for r in rows] == [2, 4, 6, 8]
        target = 2 * hurwitz_zeta(2, 1).value
        assert all(abs(r.target - target) < 1e-14 for r in rows)
        for a, b in zip(rows, rows[1:]):
            assert b.deviation + b.tail_bound < a.deviation - a.tail_bound

    def test_parity_target(self):
        rows = zeta_limit_table(ModelParams(0.5, 0.0), 2.0, 1.0, [4, 8], "parity+")
        assert rows[0].target == pytest.approx(hurwitz_zeta(2, 1).value.real)
        assert rows[1].deviation < rows[0].deviation

    def test_asymmetric_target_and_g0_row(self):
        p = ModelParams(0.4, 0.0, eps=0.3)
        target = variant_target(p, 2.0, 1.0, "asymmetric")
        assert target == pytest.approx(
            hurwitz_zeta(2, 1.3).value.real + hurwitz_zeta(2, 0.7).value.real
        )
        # at g = 0 the two-level splitting is sqrt(delta^2 + eps^2)
        zv = zeta_variant_value(p, 2.0, 1.0, "asymmetric", 2000)
        split = np.hypot(0.4, 0.3)
        closed = hurwitz_zeta(2, 1 + split).value + hurwitz_zeta(2, 1 - split).value
        assert abs(zv.value - closed) < 1e-8

    def test_hypothesis_enforced(self):
        with pytest.raises(ParameterError):
            zeta_limit_table(ModelParams(1.5, 0.0), 2.0, 1.0, [2, 4], "full")

    def test_level_limits_halving(self):
        rows = eigenvalue_limit_table(ModelParams(0.5, 0.0), [4.0, 8.0], 4)
        dev = {(r.g, r.parity, r.n): r.deviation for r in rows}
        for par in (1, -1):
            for n in range(4):
                assert dev[(8.0, par, n)] < dev[(4.0, par, n)]

    def test_level_limits_delta0_exact(self):
        rows = eigenvalue_limit_table(ModelParams(0.0, 0.0), [2.0], 4)
        assert max(r.deviation for r in rows) < 1e-9

    def test_asymmetric_levels_split(self):
        rows = eigenvalue_limit_table(
            ModelParams(0.5, 0.0, eps=0.5), [6.0], 3, variant="asymmetric"
        )
        # strong coupling: pairs approach m -/+ eps
        assert max(r.deviation for r in rows) < 0.05
        targets = [r.target for r in rows]
        assert targets[:4] == [-0.5, 0.5, 0.5, 1.5]
