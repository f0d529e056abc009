import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pbec import (CavityConfig, CoherenceSeries, coherence_time_single_mode,
                  collapse_time, fit_exponential_coherence, g1_thermal,
                  is_high_n_discrepancy_region, resolved_mode_list,
                  schawlow_townes_tau, simulate_interferogram,
                  thermalisation_ratio)
from pbec.constants import H, HBAR, K_B
from pbec.core import ResolvedMode
from pbec.errors import ConfigError, DomainError


def aniso_cavity(fx=1.42, fy=1.48):
    return CavityConfig(q=10, lambda0_nm=562.0, f_x_thz=fx, f_y_thz=fy,
                        kappa=2.0e11, n_medium=1.44)


def oracle_g1(fx_thz, fy_thz, T, tau):
    """Independent double-loop Boltzmann sum over a 40x40 resolved ladder."""
    out = np.zeros(len(tau), dtype=complex)
    norm = 0.0
    for jx in range(40):
        for jy in range(40):
            eps = H * (fx_thz * jx + fy_thz * jy) * 1e12
            w = math.exp(-eps / (K_B * T))
            norm += w
            out += w * np.exp(-1j * eps * np.asarray(tau) / HBAR)
    return out / norm


class TestG1Thermal:
    def test_unity_at_zero_delay(self):
        cav = aniso_cavity()
        series = g1_thermal(resolved_mode_list(cav, 30), 300.0, [0.0, 1e-13])
        assert abs(series.g1[0]) == pytest.approx(1.0, abs=1e-14)

    def test_isotropic_full_revival(self):
        cav = aniso_cavity(1.5, 1.5)
        tau = np.array([k / 1.5e12 for k in range(1, 4)])
        series = g1_thermal(resolved_mode_list(cav, 40), 300.0, tau)
        assert np.all(np.abs(series.visibility - 1.0) < 1e-10)

    def test_against_double_loop_oracle(self):
        # same 40x40 square mode set in both paths; the oracle is an explicit
        # double loop with no shared code
        tau = np.linspace(0.0, 1.0e-12, 101)
        cav = aniso_cavity()
        modes = [ResolvedMode(j_x=jx, j_y=jy,
                              energy=cav.eps0 + H * (1.42 * jx + 1.48 * jy) * 1e12)
                 for jx in range(40) for jy in range(40)]
        series = g1_thermal(modes, 300.0, tau)
        ref = oracle_g1(1.42, 1.48, 300.0, tau)
        assert np.max(np.abs(series.g1 - ref)) < 1e-10

    def test_anisotropic_collapse_and_partial_revival(self):
        # collapse within a factor 2 of h/k_B T = 160 fs; partial revival near
        # tau = 1/1.45 THz = 0.69 ps
        tau = np.linspace(0.0, 0.8e-12, 1601)
        cav = aniso_cavity()
        series = g1_thermal(resolved_mode_list(cav, 40), 300.0, tau)
        t_thermal = H / (K_B * 300.0)
        t_col = collapse_time(series)
        assert 0.5 * t_thermal <= t_col <= 2.0 * t_thermal
        k_rev = np.argmin(np.abs(tau - 1.0 / 1.45e12))
        window = series.visibility[k_rev - 40:k_rev + 40]
        assert 0.02 < window.max() < 0.999

    def test_conjugate_symmetry(self):
        cav = aniso_cavity()
        tau = np.linspace(-0.5e-12, 0.5e-12, 257)
        series = g1_thermal(resolved_mode_list(cav, 25), 300.0, tau)
        flipped = series.g1[::-1]
        assert np.max(np.abs(series.g1 - np.conj(flipped))) < 1e-12

    @given(fx=st.floats(1.0, 2.0), fy=st.floats(1.0, 2.0),
           T=st.floats(50.0, 600.0), tmax=st.floats(1e-14, 3e-12))
    @settings(max_examples=60, deadline=None)
    def test_visibility_never_exceeds_one(self, fx, fy, T, tmax):
        if abs(fx - fy) > 0.5 * min(fx, fy):
            return
        cav = aniso_cavity(fx, fy)
        tau = np.linspace(0.0, tmax, 64)
        series = g1_thermal(resolved_mode_list(cav, 20), T, tau)
        assert np.all(series.visibility <= 1.0 + 1e-12)

    def test_damping_reduces_revivals(self):
        cav = aniso_cavity(1.5, 1.5)
        modes = resolved_mode_list(cav, 30)
        tau = np.array([1.0 / 1.5e12, 2.0 / 1.5e12])
        undamped = g1_thermal(modes, 300.0, tau)
        damped = g1_thermal(modes, 300.0, tau, damping=[2e11] * len(modes))
        assert np.all(damped.visibility < undamped.visibility - 1e-3)

    def test_explicit_populations_override(self):
        cav = aniso_cavity(1.5, 1.5)
        modes = resolved_mode_list(cav, 10)
        pops = np.zeros(len(modes))
        pops[0] = 5.0  # pure condensate: no dephasing at all
        series = g1_thermal(modes, None, np.linspace(0.0, 1e-12, 50),
                            populations=pops)
        assert np.all(np.abs(series.visibility - 1.0) < 1e-14)

    def test_empty_ladder_rejected(self):
        with pytest.raises(ConfigError):
            g1_thermal([], 300.0, [0.0])

    def test_needs_temperature_or_populations(self):
        cav = aniso_cavity()
        with pytest.raises(DomainError):
            g1_thermal(resolved_mode_list(cav, 5), None, [0.0])


class TestCoherenceTime:
    def test_pure_cavity_loss(self):
        kappa = 1.0 / 5.2e-12
        assert coherence_time_single_mode(kappa, 0.0) == pytest.approx(10.4e-12, rel=1e-12)

    def test_equal_rates(self):
        assert coherence_time_single_mode(2.0e11, 2.0e11) == pytest.approx(1.0 / 2.0e11, rel=1e-12)

    def test_composition_with_thermalisation_ratio(self, ref_dye):
        # tau_c = 2/(kappa(1+gamma)) through the dye table at 563 nm
        cav = CavityConfig(q=10, lambda0_nm=563.0, f_x_thz=1.5, f_y_thz=1.5,
                           kappa=2.0e11, n_medium=1.44)
        gamma = thermalisation_ratio(ref_dye, cav, 563.0)
        reabs = ref_dye.n_mol * ref_dye.sigma(563.0) * cav.c_star
        got = coherence_time_single_mode(cav.kappa, reabs)
        assert got == pytest.approx(2.0 / (cav.kappa * (1.0 + gamma)), rel=1e-12)

    def test_strictly_decreasing_in_both_rates(self):
        ks = np.linspace(1e11, 5e11, 20)
        taus = [coherence_time_single_mode(float(k), 1e11) for k in ks]
        assert np.all(np.diff(taus) < 0)
        rs = np.linspace(0.0, 5e11, 20)
        taus = [coherence_time_single_mode(2e11, float(r)) for r in rs]
        assert np.all(np.diff(taus) < 0)


class TestSchawlowTownes:
    def test_low_n_limit(self):
        assert schawlow_townes_tau(0.0, 1e-11, 1.0) == 1e-11

    def test_linear_regime(self):
        tau = schawlow_townes_tau(100.0, 1e-11, 1.0)
        assert tau == pytest.approx(101.0 * 1e-11, rel=1e-14)
        assert tau == pytest.approx(100.0 * 1e-11, rel=0.011)

    def test_monotone_over_grid(self):
        ns = np.linspace(0.0, 1e4, 2000)
        taus = [schawlow_townes_tau(float(n), 1e-11, 2.0) for n in ns]
        assert np.all(np.diff(taus) > 0)

    def test_discrepancy_region_flag(self):
        assert not is_high_n_discrepancy_region(5.0)
        assert is_high_n_discrepancy_region(50.0)
        assert is_high_n_discrepancy_region(500.0)


class TestInterferogram:
    def test_full_visibility_equal_arms(self):
        out = simulate_interferogram(1.0 + 0.0j, 3.3e15, 1e-12, 1.0)
        assert out.visibility == pytest.approx(1.0, rel=1e-12)
        assert out.i_min == pytest.approx(0.0, abs=1e-12)

    def test_zero_coherence(self):
        out = simulate_interferogram(0.0j, 3.3e15, 1e-12, 1.0)
        assert out.visibility == 0.0
        assert out.i_max == out.i_min == pytest.approx(1.0)

    def test_unbalanced_arms_closed_form(self):
        out = simulate_interferogram(0.5 + 0.0j, 3.3e15, 0.0, 4.0)
        assert out.visibility == pytest.approx(0.4, rel=1e-12)

    @given(mag=st.floats(0.0, 1.0), ratio=st.floats(0.01, 100.0))
    @settings(max_examples=100, deadline=None)
    def test_arm_swap_invariance(self, mag, ratio):
        a = simulate_interferogram(mag + 0.0j, 1e15, 1e-13, ratio)
        b = simulate_interferogram(mag + 0.0j, 1e15, 1e-13, 1.0 / ratio)
        assert a.visibility == pytest.approx(b.visibility, rel=1e-12, abs=1e-15)

    def test_rejects_bad_ratio(self):
        with pytest.raises(DomainError):
            simulate_interferogram(0.5 + 0.0j, 1e15, 0.0, 0.0)


class TestExponentialFit:
    def test_pure_exponential_recovery(self):
        tau = np.linspace(0.0, 3e-11, 200)
        series = CoherenceSeries(tau=tau, g1=np.exp(-tau / 5e-12).astype(complex))
        fit = fit_exponential_coherence(series)
        assert fit.ok
        assert fit.tau_c == pytest.approx(5e-12, rel=1e-3)

    def test_symmetric_offset_recovered(self):
        tau = np.linspace(-2e-12, 4e-12, 241)
        vis = 0.8 * np.exp(-np.abs(tau - 1e-12) / 5e-13)
        fit = fit_exponential_coherence(CoherenceSeries(tau=tau, g1=vis.astype(complex)))
        grid_step = tau[1] - tau[0]
        assert abs(fit.tau_0 - 1e-12) <= grid_step
        assert fit.amplitude == pytest.approx(0.8, rel=1e-3)

    def test_matches_single_mode_theory(self, ref_dye):
        # damped single-mode series vs the closed-form coherence time
        cav = CavityConfig(q=10, lambda0_nm=563.0, f_x_thz=1.5, f_y_thz=1.5,
                           kappa=2.0e11, n_medium=1.44)
        reabs = ref_dye.n_mol * ref_dye.sigma(563.0) * cav.c_star
        tau_c = coherence_time_single_mode(cav.kappa, reabs)
        modes = [ResolvedMode(j_x=0, j_y=0, energy=cav.eps0)]
        tau = np.linspace(0.0, 5.0 * tau_c, 300)
        series = g1_thermal(modes, None, tau, populations=[1.0],
                            damping=[cav.kappa + reabs])
        fit = fit_exponential_coherence(series)
        assert fit.ok
        assert fit.tau_c == pytest.approx(tau_c, rel=0.02)

    def test_non_decaying_flagged(self):
        tau = np.linspace(0.0, 1e-12, 50)
        series = CoherenceSeries(tau=tau, g1=np.full(50, 0.9, dtype=complex))
        fit = fit_exponential_coherence(series)
        assert not fit.ok

    def test_needs_five_points(self):
        from pbec.errors import FitError
        series = CoherenceSeries(tau=np.array([0.0, 1e-13, 2e-13]),
                                 g1=np.array([1.0, 0.5, 0.2], dtype=complex))
        with pytest.raises(FitError):
            fit_exponential_coherence(series)


class TestSeriesType:
    def test_magnitude_guard(self):
        with pytest.raises(ConfigError):
            CoherenceSeries(tau=np.array([0.0]), g1=np.array([1.5 + 0.0j]))

    def test_collapse_time_interier(self):
        tau = np.linspace(0.0, 1e-12, 1001)
        vis = np.exp(-(tau / 1e-13) ** 2)
        series = CoherenceSeries(tau=tau, g1=vis.astype(complex))
        t = collapse_time(series, floor=math.exp(-1.0))
        assert t == pytest.approx(1e-13, rel=0.02)

    def test_collapse_time_needs_decay(self):
        series = CoherenceSeries(tau=np.linspace(0, 1e-12, 10),
                                 g1=np.full(10, 0.8, dtype=complex))
        with pytest.raises(DomainError):
            collapse_time(series)
