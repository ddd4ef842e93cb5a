"""Finite-volume solver: fluxes, stepping, audits, manufactured convergence."""

import warnings

import numpy as np
import pytest

from diffusionwave.dynamics import (
    PhysicalState,
    SolverConfig,
    max_wavespeed,
    numerical_flux,
    physical_flux,
    run,
    step,
)
from diffusionwave.errors import ConfigError, VacuumViolation
from diffusionwave.profile import LimitSpec
from diffusionwave.thermo import PressureLaw

LAW = PressureLaw(1.0, 2.0)
UNIT = LimitSpec(1.0, 1.0, 1.0)


class TestFlux:
    def test_physical(self):
        assert physical_flux(1.0, 3.0, LAW) == (3.0, 10.0)
        assert physical_flux(2.0, 0.0, LAW) == (0.0, 4.0)
        assert physical_flux(0.0, 0.0, LAW) == (0.0, 0.0)

    def test_vacuum_violation(self):
        with pytest.raises(VacuumViolation):
            physical_flux(0.0, 1.0, LAW)

    def test_numerical_consistency(self):
        assert numerical_flux((1.0, 0.0), (1.0, 0.0), LAW) == (0.0, 1.0)
        f_rho, f_m = numerical_flux((1.0, 1.0), (1.0, 1.0), LAW)
        assert (f_rho, f_m) == (1.0, 2.0)

    def test_numerical_upwinding(self):
        # s = max(sqrt(2), 2 sqrt(2)); central average minus (s/2) jump
        f_rho, f_m = numerical_flux((1.0, 0.0), (4.0, 0.0), LAW)
        assert f_rho == pytest.approx(-3.0 * np.sqrt(2.0), rel=1e-14)
        assert f_m == pytest.approx(8.5, rel=1e-14)

    def test_wavespeed(self):
        # |u| + sqrt(p'(rho)) with rho=1, m=2: 2 + sqrt(2)
        assert max_wavespeed(np.array([1.0]), np.array([2.0]), LAW) == pytest.approx(
            2.0 + np.sqrt(2.0)
        )


def _constant_state(n=240, dx=0.1, rho=1.0, m=1.0):
    x = (np.arange(n) + 0.5) * dx - n * dx / 2
    return PhysicalState(x, np.full(n, rho), np.full(n, m), 0.0)


class TestStep:
    def test_dt_formula(self):
        state = _constant_state(rho=1.0, m=0.0, dx=0.01)
        # wavespeed sqrt(2); cfl 0.45 -> dt = 0.45*0.01/sqrt(2)
        new = step(state, SolverConfig(cfl=0.45), LAW, 0.0, UNIT)
        assert new.t == pytest.approx(0.45 * 0.01 / np.sqrt(2.0), rel=1e-14)

    def test_constant_state_exact_damping(self):
        state = _constant_state()
        cfg = SolverConfig(cfl=0.45)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            out = run(state, cfg, LAW, UNIT, float(np.log(2.0)))
        mid = out.final.x.size // 2
        assert out.final.m[mid] == pytest.approx(0.5, rel=1e-12)
        assert out.final.rho[mid] == pytest.approx(1.0, rel=1e-13)

    def test_zero_damping_equilibrium(self):
        state = _constant_state(m=0.0)
        limits = LimitSpec(1.0, 1.0, 0.0)
        new = step(state, SolverConfig(), LAW, 0.0, limits)
        assert np.all(new.rho == 1.0)
        assert np.all(new.m == 0.0)

    def test_config_validation(self):
        with pytest.raises(ConfigError):
            SolverConfig(cfl=0.6)
        with pytest.raises(ConfigError):
            SolverConfig(order=3)


class TestRun:
    def test_conservation_audit(self):
        # density bump around 1: mass change equals net boundary flux
        n, dx = 400, 0.05
        x = (np.arange(n) + 0.5) * dx - 10.0
        rho = 1.0 + 0.2 * np.exp(-(x**2))
        state = PhysicalState(x, rho, np.zeros(n), 0.0)
        out = run(state, SolverConfig(), LAW, UNIT, 2.0)
        meta = out.meta
        drift = np.abs(meta["mass"] - state.mass - meta["boundary_flux_mass"])
        assert np.max(drift) <= 1e-10 * state.mass

    def test_momentum_balance_ledger(self):
        # total momentum change = net boundary flux - accumulated friction
        # sink; the discrete ledger telescopes exactly, so the imbalance sits
        # at rounding level for any step size
        def imbalance(cfl):
            n, dx = 200, 0.1
            x = (np.arange(n) + 0.5) * dx - 10.0
            rho = 1.0 + 0.2 * np.exp(-(x**2))
            state = PhysicalState(x, rho, np.zeros(n), 0.0)
            out = run(state, SolverConfig(cfl=cfl), LAW, UNIT, 1.0)
            meta = out.meta
            return abs(
                meta["momentum"][-1] - state.momentum
                - meta["boundary_flux_momentum"][-1] + meta["damping_sink"][-1]
            )

        assert imbalance(0.4) <= 1e-12
        assert imbalance(0.1) <= 1e-12

    def test_snapshots_hit_exactly(self):
        state = _constant_state(m=0.0)
        cfg = SolverConfig(snapshot_times=(0.25, 0.5))
        out = run(state, cfg, LAW, UNIT, 0.5)
        assert [s.t for s in out.snapshots] == [0.0, 0.25, 0.5]

    def test_bad_schedule(self):
        state = _constant_state(m=0.0)
        with pytest.raises(ConfigError):
            run(state, SolverConfig(), LAW, UNIT, 0.0)
        with pytest.raises(ConfigError):
            run(state, SolverConfig(snapshot_times=(2.0,)), LAW, UNIT, 1.0)

    def test_domain_too_small_for_window(self):
        state = _constant_state(n=100, dx=0.1, m=0.0)
        with pytest.raises(ConfigError):
            run(state, SolverConfig(), LAW, UNIT, 3.0, scaled_halfwidth=8.0)


# ---------------------------------------------------------------------------
# manufactured-solution convergence


@pytest.fixture(scope="module")
def manufactured():
    import sympy as sp

    t, x = sp.symbols("t x")
    alpha = 1.0
    rho = 2 + sp.Rational(1, 2) * sp.sin(x) * sp.cos(t)
    m = sp.Rational(3, 10) * sp.cos(x) * sp.sin(t)
    p = rho**2
    s_rho = sp.diff(rho, t) + sp.diff(m, x)
    s_m = sp.diff(m, t) + sp.diff(m**2 / rho + p, x) + alpha * m
    fs = [sp.lambdify((t, x), f, "numpy") for f in (rho, m, s_rho, s_m)]
    return fs


def _manufactured_error(manufactured, n, t_end=0.25, order=2):
    rho_f, m_f, s_rho_f, s_m_f = manufactured
    L = np.pi
    dx = 2 * L / n
    x = (np.arange(n) + 0.5) * dx - L

    cfg = SolverConfig(
        cfl=0.4,
        order=order,
        forcing=lambda t, xx: (s_rho_f(t, xx), s_m_f(t, xx)),
        ghost_states=lambda t, xg: (rho_f(t, xg), m_f(t, xg)),
    )
    state = PhysicalState(x, rho_f(0.0, x), m_f(0.0, x), 0.0)
    out = run(state, cfg, LAW, LimitSpec(2.0, 2.0, 1.0), t_end)
    return float(np.mean(np.abs(out.final.rho - rho_f(t_end, x))))


@pytest.mark.parametrize("order,min_rate", [(1, 0.8), (2, 1.7)])
def test_manufactured_convergence(manufactured, order, min_rate):
    errors = [_manufactured_error(manufactured, n, order=order)
              for n in (100, 200, 400)]
    rates = [np.log2(errors[i] / errors[i + 1]) for i in range(2)]
    assert min(rates) >= min_rate, (errors, rates)
