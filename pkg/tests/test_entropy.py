"""Relative entropy densities, residuals, identities, bounds, Gronwall."""

import numpy as np
import pytest

from diffusionwave.entropy import (
    ReferencePair,
    ScaledFieldView,
    coercivity_constants,
    entropy_identity_residual,
    error_terms,
    exchange_identity_residual,
    gronwall_bound,
    relative_entropy_density,
    total_relative_entropy,
    xi_bound_check,
)
from diffusionwave.errors import DomainError
from diffusionwave.profile import LimitSpec, solve_profile
from diffusionwave.scaling import ScaledField
from diffusionwave.thermo import PressureLaw

LAW = PressureLaw(1.0, 2.0)


class TestDensity:
    def test_kinetic_only(self):
        eta, _ = relative_entropy_density(0.0, 1.0, 1.0, 1.0, 0.0, LAW)
        assert eta == 0.5

    def test_coincidence(self):
        assert relative_entropy_density(0.7, 1.3, 0.4, 1.3, 0.4, LAW) == (0.0, 0.0)

    def test_flux_example(self):
        _, q = relative_entropy_density(0.0, 1.0, 2.0, 1.0, 0.0, LAW)
        assert q == 4.0

    def test_nonnegative_random(self):
        rng = np.random.default_rng(11)
        eta, _ = relative_entropy_density(
            rng.uniform(0, 4), rng.uniform(0.01, 10, 10000),
            rng.uniform(-5, 5, 10000), rng.uniform(0.01, 10, 10000),
            rng.uniform(-5, 5, 10000), LAW,
        )
        assert np.all(eta >= -1e-14)

    def test_vacuum_reference_needs_admissible_law(self):
        eta, _ = relative_entropy_density(0.0, 1.0, 0.0, 0.0, 0.0, LAW)
        assert eta == pytest.approx(1.0)  # h(1|0) = h(1) for gamma = 2
        with pytest.raises(DomainError):
            relative_entropy_density(0.0, 1.0, 0.0, 0.0, 0.0, PressureLaw(1.0, 1.0))

    def test_entropy_flux_control_ratio_bounded(self):
        # |q_rel| is controlled by (|u1| + |u2| + e^{tau/2}) eta_rel;
        # the empirical supremum of the ratio stays finite
        rng = np.random.default_rng(12)
        tau = 1.0
        rho1 = rng.uniform(0.5, 2.0, 100000)
        n1 = rng.uniform(-2, 2, 100000)
        rho2 = rng.uniform(0.5, 2.0, 100000)
        n2 = rng.uniform(-2, 2, 100000)
        eta, q = relative_entropy_density(tau, rho1, n1, rho2, n2, LAW)
        coef = (np.abs(n1) / rho1 + np.abs(n2) / rho2 + np.exp(tau / 2)) * eta
        mask = eta > 1e-14
        sup = np.max(np.abs(q[mask]) / coef[mask])
        assert np.isfinite(sup) and sup < 100.0


class TestTotals:
    def _grid_field(self, tau, y, rho, n):
        return ScaledField(tau, y, rho, n)

    def test_field_equals_reference(self):
        y = np.linspace(-2, 2, 101)
        ref = ReferencePair.constant(1.0)
        field = self._grid_field(0.0, y, np.ones_like(y), np.zeros_like(y))
        totals = total_relative_entropy(field, ref, 1.0, LAW)
        assert totals.E == 0.0 and totals.D_alpha == 0.0

    def test_indicator_deviation(self):
        # rho = 1, velocity deviation 1 on [0, 1): E = 0.5, D = alpha = 2
        dy = 0.01
        y = np.arange(-200, 201) * dy
        n = np.where((y >= 0) & (y < 1.0), 1.0, 0.0)
        field = self._grid_field(0.0, y, np.ones_like(y), n)
        ref = ReferencePair.constant(1.0)
        totals = total_relative_entropy(field, ref, 2.0, LAW)
        assert totals.E == pytest.approx(0.5, rel=1e-12)
        assert totals.D_alpha == pytest.approx(2.0, rel=1e-12)

    def test_additivity_under_support_doubling(self):
        dy = 0.01
        y = np.arange(-300, 301) * dy
        ref = ReferencePair.constant(1.0)
        out = []
        for width in (1.0, 2.0):
            n = np.where((y >= 0) & (y < width), 1.0, 0.0)
            field = self._grid_field(0.0, y, np.ones_like(y), n)
            out.append(total_relative_entropy(field, ref, 2.0, LAW))
        assert out[1].E == pytest.approx(2 * out[0].E, rel=1e-12)
        assert out[1].D_alpha == pytest.approx(2 * out[0].D_alpha, rel=1e-12)

    def test_tail_monitor(self):
        y = np.linspace(-2, 2, 101)
        ref = ReferencePair.constant(1.0)
        field = self._grid_field(0.0, y, np.full_like(y, 1.1), np.zeros_like(y))
        assert not total_relative_entropy(field, ref, 1.0, LAW).tail_ok


class TestExchangeIdentity:
    def test_spec_triple(self):
        res = exchange_identity_residual(
            0.0, (2.0, 1.0), (1.0, 0.5), (1.5, -1.0), LAW)
        assert res <= 1e-13

    def test_all_equal(self):
        res = exchange_identity_residual(
            0.3, (1.2, 0.7), (1.2, 0.7), (1.2, 0.7), LAW)
        assert res == 0.0

    def test_random_triples(self):
        rng = np.random.default_rng(13)
        N = 100000
        args = [(rng.uniform(0.1, 10, N), rng.uniform(-5, 5, N)) for _ in range(3)]
        tau = rng.uniform(0, 4)
        res = exchange_identity_residual(tau, *args, LAW)
        e1, _ = relative_entropy_density(tau, *args[0], *args[1], LAW)
        e2, _ = relative_entropy_density(tau, *args[0], *args[2], LAW)
        scale = np.maximum(1.0, np.abs(e1) + np.abs(e2))
        assert np.max(res / scale) <= 1e-12


@pytest.fixture(scope="module")
def jump_profile():
    limits = LimitSpec(1.05, 0.95, 1.0)
    return solve_profile(limits, LAW, dy=0.02), limits


class TestErrorTerms:
    def test_constant_reference_all_zero(self):
        y = np.linspace(-4, 4, 201)
        rng = np.random.default_rng(14)
        field = ScaledFieldView(0.5, y, rng.uniform(0.5, 2, y.size),
                                rng.uniform(-1, 1, y.size))
        ref = ReferencePair.constant(1.3)
        terms = error_terms(field, ref, 0.5, 1.0, LAW)
        for arr in (terms.R1, terms.R2, terms.xi1, terms.xi2, terms.xi3):
            assert np.all(arr == 0.0)
        assert terms.Xi == (0.0, 0.0, 0.0)

    def test_profile_reference(self, jump_profile):
        # R1 vanishes up to the difference of the two discrete derivative
        # stencils; the exponentially weighted bracket in R2 cancels exactly,
        # leaving the profile residual field
        prof, limits = jump_profile
        y = np.linspace(-8.0, 8.0, 801)
        ref = ReferencePair.from_profile(prof, limits)
        rng = np.random.default_rng(15)
        field = ScaledFieldView(3.0, y, rng.uniform(0.9, 1.1, y.size),
                                rng.uniform(-0.1, 0.1, y.size))
        terms = error_terms(field, ref, 3.0, 1.0, LAW)
        assert np.max(np.abs(terms.R1)) <= 1e-3
        assert np.max(np.abs(terms.xi3)) <= 1e-2
        i0 = int(round((y[0] - prof.y[0]) / prof.dy))
        r_star = prof.r_star[i0:i0 + y.size]
        # R2 rebuilds (n^2/rho)_y by the product rule, the stored residual
        # differentiates the quotient directly: difference is O(dy^2) small
        assert np.max(np.abs(terms.R2 - r_star)) <= 1e-7

    def test_exact_solution_reference(self):
        # spatially uniform exact solution of the scaled system:
        # rho = rho0, n = e^{tau/2} m0 e^{-alpha(e^tau - 1)}
        rho0, m0, alpha = 1.3, 0.5, 1.0

        def n_bar(tau, y):
            return np.full_like(np.asarray(y, float),
                                np.exp(tau / 2) * m0 * np.exp(-alpha * np.expm1(tau)))

        def n_tau(tau, y):
            return n_bar(tau, y) * (0.5 - alpha * np.exp(tau))

        zero = lambda tau, y: np.zeros_like(np.asarray(y, float))
        ref = ReferencePair.analytic(
            rho=lambda tau, y: np.full_like(np.asarray(y, float), rho0),
            n=n_bar, rho_tau=zero, rho_y=zero, n_tau=n_tau, n_y=zero,
        )
        y = np.linspace(-3, 3, 301)
        rng = np.random.default_rng(16)
        field = ScaledFieldView(0.8, y, rng.uniform(0.5, 2, y.size),
                                rng.uniform(-1, 1, y.size))
        terms = error_terms(field, ref, 0.8, alpha, LAW)
        assert np.max(np.abs(terms.R1)) <= 1e-12
        assert np.max(np.abs(terms.R2)) <= 1e-12
        assert np.max(np.abs(terms.xi2)) <= 1e-11
        assert np.max(np.abs(terms.xi3)) <= 1e-11


class TestEntropyIdentity:
    class _Constant:
        def rho(self, tau, y):
            return 1.7

        def n(self, tau, y):
            return 0.0

    class _Exact:
        rho0, m0, alpha = 1.3, 0.5, 1.0

        def rho(self, tau, y):
            return self.rho0

        def n(self, tau, y):
            return np.exp(tau / 2) * self.m0 * np.exp(-self.alpha * np.expm1(tau))

    def test_constant_field(self):
        res = entropy_identity_residual(self._Constant(), 0.5, 0.3, 1.0, LAW, 0.05)
        assert abs(res) <= 1e-13

    def test_exact_solution_second_order(self):
        f = self._Exact()
        res = [abs(entropy_identity_residual(f, 0.7, 0.3, f.alpha, LAW, h))
               for h in (0.1, 0.05)]
        assert res[0] / res[1] == pytest.approx(4.0, rel=0.2)

    def test_profile_pair_not_a_solution(self, jump_profile):
        # inserting the steady profile leaves a nonzero, h-stable residual
        prof, limits = jump_profile
        ref = ReferencePair.from_profile(prof, limits)

        class Field:
            def rho(self, tau, y):
                return float(ref.rho(tau, np.asarray([y]))[0])

            def n(self, tau, y):
                return float(ref.n(tau, np.asarray([y]))[0])

        vals = [entropy_identity_residual(Field(), 1.0, 0.5, 1.0, LAW, h)
                for h in (0.02, 0.01)]
        assert abs(vals[1]) > 1e-4
        assert vals[0] == pytest.approx(vals[1], rel=0.2)


class TestXiBounds:
    def test_state_equals_reference(self, jump_profile):
        prof, limits = jump_profile
        ref = ReferencePair.from_profile(prof, limits)
        y = np.linspace(-6, 6, 301)
        data = ref.eval(1.0, y, LAW)
        assert xi_bound_check(1.0, y, data.rho, data.n, ref, LAW, 1.0) == 0

    def test_random_states(self, jump_profile):
        prof, limits = jump_profile
        ref = ReferencePair.from_profile(prof, limits)
        rng = np.random.default_rng(17)
        y = np.linspace(-6, 6, 301)
        violations = 0
        for _ in range(20):
            violations += xi_bound_check(
                rng.uniform(0, 4), y, rng.uniform(0.2, 3, y.size),
                rng.uniform(-2, 2, y.size), ref, LAW, 1.0)
        assert violations == 0


class TestGronwall:
    def test_pure_decay(self):
        tau = np.linspace(0, 1, 201)
        val = gronwall_bound(1.0, np.full_like(tau, -0.5), np.zeros_like(tau), tau)
        assert val == pytest.approx(np.exp(-0.5), rel=1e-6)

    def test_pure_source(self):
        tau = np.linspace(0, 3, 301)
        val = gronwall_bound(0.0, np.zeros_like(tau), np.ones_like(tau), tau)
        assert val == pytest.approx(3.0, rel=1e-12)

    def test_below_closed_form_majorant(self):
        theta, mu, K, E0 = 0.1, 0.3, 0.2, 1.0
        tau = np.linspace(0, 2, 2001)
        a = -0.5 + theta + mu * np.exp(-tau / 2)
        b = K * np.exp(-tau / 2)
        val = gronwall_bound(E0, a, b, tau)
        majorant = np.exp(-(0.5 - theta) * 2.0 + mu / 2) * (E0 + K / theta)
        assert val <= majorant


class TestCoercivity:
    def test_constants_positive(self):
        cc = coercivity_constants(LAW, 0.5, 2.0)
        assert cc.r0 == 4.0
        assert cc.C_small > 0 and cc.C_large > 0

    def test_lower_bound_random(self):
        cc = coercivity_constants(LAW, 0.5, 2.0)
        rng = np.random.default_rng(18)
        N = 20000
        rho = rng.uniform(0.0, cc.rho_cap, N)
        rho_bar = rng.uniform(0.5, 2.0, N)
        n = rng.uniform(-3, 3, N)
        tau = rng.uniform(0, 4, N)
        eta, _ = relative_entropy_density(tau, rho, n, rho_bar, 0.0, LAW)
        lower = cc.lower_bound(tau, rho, n, rho_bar, LAW.gamma)
        assert np.all(eta >= lower - 1e-12 * np.maximum(1.0, lower))
