import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pbec import (CavityConfig, build_mode_ladder, derive_trap_frequency,
                  kennard_stepanov_ratio, load_dye_spectra,
                  resolved_mode_list, save_dye_spectra, thermalisation_ratio)
from pbec.constants import H, K_B, C
from pbec.core import DyeModel
from pbec.errors import ConfigError, DomainError


class TestCavityConfig:
    def test_validation(self):
        with pytest.raises(ConfigError):
            CavityConfig(q=0, lambda0_nm=570, f_x_thz=1.5, f_y_thz=1.5, kappa=1e11)
        with pytest.raises(ConfigError):
            CavityConfig(q=10, lambda0_nm=570, f_x_thz=-1.5, f_y_thz=1.5, kappa=1e11)
        with pytest.raises(ConfigError):
            CavityConfig(q=10, lambda0_nm=570, f_x_thz=1.5, f_y_thz=1.5, kappa=0.0)
        with pytest.raises(ConfigError):
            CavityConfig(q=10, lambda0_nm=570, f_x_thz=1.5, f_y_thz=1.5,
                         kappa=1e11, n_medium=0.9)

    def test_length_must_stay_below_curvature(self):
        # q lambda/2n = 1979 nm; a 1 um curvature radius is shorter
        with pytest.raises(ConfigError, match="curvature"):
            CavityConfig(q=10, lambda0_nm=570, f_x_thz=1.5, f_y_thz=1.5,
                         kappa=1e11, n_medium=1.44, roc_um=1.0)


class TestTrapFrequency:
    def test_plausible_range(self, std_cavity):
        f = derive_trap_frequency(std_cavity)
        assert 1.0 <= f <= 2.0  # THz window for these geometries

    def test_planar_limit(self, std_cavity):
        import dataclasses
        wide = dataclasses.replace(std_cavity, roc_um=4e9)
        assert derive_trap_frequency(wide) < 1e-3 * derive_trap_frequency(std_cavity)

    def test_sqrt2_scaling(self, std_cavity):
        import dataclasses
        half = dataclasses.replace(std_cavity, roc_um=std_cavity.roc_um / 2.0)
        ratio = derive_trap_frequency(half) / derive_trap_frequency(std_cavity)
        assert ratio == pytest.approx(math.sqrt(2.0), rel=1e-12)

    def test_requires_curvature(self):
        flat = CavityConfig(q=10, lambda0_nm=570, f_x_thz=1.5, f_y_thz=1.5, kappa=1e11)
        with pytest.raises(ConfigError):
            derive_trap_frequency(flat)


class TestModeLadder:
    def test_isotropic_degeneracies_and_spacing(self, std_cavity):
        lad = build_mode_ladder(std_cavity, 3)
        assert [m.degeneracy for m in lad.modes] == [1, 2, 3]
        step = H * 1.5e12
        for m in lad.modes:
            assert m.energy == pytest.approx(lad.eps0 + m.index * step, rel=1e-14)

    def test_lambda9_frozen_oracle(self, std_cavity):
        # independent arithmetic: eps0 = h c/570nm, eps9 = eps0 + 9 h f
        lad = build_mode_ladder(std_cavity, 10)
        assert lad.modes[9].lambda_nm == pytest.approx(555.7355157555727, rel=1e-12)

    def test_degeneracy_sum_identity(self, std_cavity):
        for n in (1, 5, 20):
            lad = build_mode_ladder(std_cavity, n)
            assert int(lad.degeneracies.sum()) == n * (n + 1) // 2

    def test_anisotropic_resolved_levels(self):
        cav = CavityConfig(q=10, lambda0_nm=562.0, f_x_thz=1.42, f_y_thz=1.48,
                           kappa=2e11, n_medium=1.44)
        lad = build_mode_ladder(cav, 4)
        assert lad.resolved is not None
        by_q = {(m.j_x, m.j_y): m.energy for m in lad.resolved}
        assert by_q[(1, 0)] == pytest.approx(cav.eps0 + H * 1.42e12, rel=1e-14)
        assert by_q[(0, 1)] == pytest.approx(cav.eps0 + H * 1.48e12, rel=1e-14)

    def test_isotropic_has_no_resolved_list(self, std_cavity):
        assert build_mode_ladder(std_cavity, 5).resolved is None

    def test_resolved_count(self, std_cavity):
        assert len(resolved_mode_list(std_cavity, 6)) == 21

    def test_rejects_bad_inputs(self, std_cavity):
        with pytest.raises(ConfigError):
            build_mode_ladder(std_cavity, 0)
        lopsided = CavityConfig(q=10, lambda0_nm=570, f_x_thz=1.0, f_y_thz=1.6,
                                kappa=2e11)
        with pytest.raises(ConfigError, match="50%"):
            build_mode_ladder(lopsided, 5)


class TestThermalisationRatio:
    def test_zero_cross_section(self, std_cavity):
        dye = DyeModel(wavelengths_nm=np.array([500.0, 600.0]),
                       sigma_m2=np.array([0.0, 0.0]), lambda_zpl_nm=545.0,
                       T_dye=300.0, n_mol=1e23, gamma_down=1e7)
        assert thermalisation_ratio(dye, std_cavity, 550.0) == 0.0

    def test_unity_when_rates_match(self, std_cavity):
        sigma = std_cavity.kappa / (1e23 * std_cavity.c_star)
        dye = DyeModel(wavelengths_nm=np.array([500.0, 600.0]),
                       sigma_m2=np.array([sigma, sigma]), lambda_zpl_nm=545.0,
                       T_dye=300.0, n_mol=1e23, gamma_down=1e7)
        assert thermalisation_ratio(dye, std_cavity, 555.0) == pytest.approx(1.0, rel=1e-12)

    def test_reference_anchors(self, ref_dye):
        cav = CavityConfig(q=10, lambda0_nm=557.0, f_x_thz=1.5, f_y_thz=1.5,
                           kappa=2.0e11, n_medium=1.44)
        for lam, target in [(557.0, 6.7), (563.0, 2.7), (580.0, 0.15)]:
            got = thermalisation_ratio(ref_dye, cav.with_cutoff(lam), lam)
            assert abs(got - target) <= 0.25 * target

    def test_linearity(self, std_cavity, ref_dye):
        import dataclasses
        g1 = thermalisation_ratio(ref_dye, std_cavity, 570.0)
        doubled = dataclasses.replace(ref_dye, n_mol=2.0 * ref_dye.n_mol)
        assert thermalisation_ratio(doubled, std_cavity, 570.0) == pytest.approx(2 * g1, rel=1e-12)
        half_kappa = dataclasses.replace(std_cavity, kappa=std_cavity.kappa / 2)
        assert thermalisation_ratio(ref_dye, half_kappa, 570.0) == pytest.approx(2 * g1, rel=1e-12)

    def test_out_of_range_rejected(self, std_cavity, ref_dye):
        with pytest.raises(DomainError):
            thermalisation_ratio(ref_dye, std_cavity, 650.0)


class TestKennardStepanov:
    def test_zero_detuning(self):
        assert kennard_stepanov_ratio(0.0, 300.0) == 1.0

    def test_kT_detuning(self):
        assert kennard_stepanov_ratio(K_B * 300.0, 300.0) == pytest.approx(math.exp(-1.0), rel=1e-14)

    def test_frozen_derived_value(self):
        # delta = h * 1.5 THz at 300 K; independent arithmetic gives
        # delta/kT = 0.23996215366831106
        got = kennard_stepanov_ratio(H * 1.5e12, 300.0)
        assert got == pytest.approx(0.7866576326088673, rel=1e-13)

    @given(delta=st.floats(-5e-20, 5e-20), T=st.floats(10.0, 1000.0))
    @settings(max_examples=200, deadline=None)
    def test_reciprocity(self, delta, T):
        prod = kennard_stepanov_ratio(delta, T) * kennard_stepanov_ratio(-delta, T)
        assert prod == pytest.approx(1.0, rel=1e-12)

    def test_requires_positive_temperature(self):
        with pytest.raises(DomainError):
            kennard_stepanov_ratio(1e-21, 0.0)


class TestDyeSpectraIO:
    def _table(self):
        wl = np.linspace(500.0, 600.0, 100)
        sg = 1e-20 * np.exp(-((wl - 540.0) / 20.0) ** 2)
        return wl, sg

    def test_load_well_formed(self):
        wl, sg = self._table()
        text = "# comment\n" + "\n".join(f"{a}\t{b}" for a, b in zip(wl, sg))
        dye = load_dye_spectra(io.StringIO(text), lambda_zpl_nm=545.0,
                               T_dye=300.0, n_mol=1e23, gamma_down=1e7)
        assert dye.wavelengths_nm.size == 100

    def test_comma_separator(self):
        text = "510.0,1e-20\n520.0,2e-20\n"
        dye = load_dye_spectra(io.StringIO(text), lambda_zpl_nm=545.0,
                               T_dye=300.0, n_mol=1e23, gamma_down=1e7)
        assert dye.sigma(515.0) == pytest.approx(1.5e-20)

    def test_duplicate_wavelengths_rejected(self):
        text = "510.0\t1e-20\n510.0\t2e-20\n520.0\t1e-20\n"
        with pytest.raises(ConfigError, match="duplicate|increasing"):
            load_dye_spectra(io.StringIO(text), lambda_zpl_nm=545.0,
                             T_dye=300.0, n_mol=1e23, gamma_down=1e7)

    def test_unsorted_rejected(self):
        text = "520.0\t1e-20\n510.0\t2e-20\n"
        with pytest.raises(ConfigError):
            load_dye_spectra(io.StringIO(text), lambda_zpl_nm=545.0,
                             T_dye=300.0, n_mol=1e23, gamma_down=1e7)

    def test_negative_cross_section_rejected(self):
        text = "510.0\t1e-20\n520.0\t-1e-20\n"
        with pytest.raises(ConfigError, match="negative"):
            load_dye_spectra(io.StringIO(text), lambda_zpl_nm=545.0,
                             T_dye=300.0, n_mol=1e23, gamma_down=1e7)

    def test_too_few_rows(self):
        with pytest.raises(ConfigError, match="2 rows|2 grid"):
            load_dye_spectra(io.StringIO("510.0\t1e-20\n"), lambda_zpl_nm=545.0,
                             T_dye=300.0, n_mol=1e23, gamma_down=1e7)

    def test_roundtrip_bit_exact(self, tmp_path):
        wl, sg = self._table()
        dye = DyeModel(wavelengths_nm=wl, sigma_m2=sg, lambda_zpl_nm=545.0,
                       T_dye=300.0, n_mol=1e23, gamma_down=1e7)
        path = tmp_path / "dye.tsv"
        save_dye_spectra(dye, path, comment="roundtrip")
        back = load_dye_spectra(path, lambda_zpl_nm=545.0, T_dye=300.0,
                                n_mol=1e23, gamma_down=1e7)
        assert np.array_equal(back.wavelengths_nm, dye.wavelengths_nm)
        assert np.array_equal(back.sigma_m2, dye.sigma_m2)

    def test_interpolation_exact_at_nodes_bounded_between(self, ref_dye):
        wl = ref_dye.wavelengths_nm
        sg = ref_dye.sigma_m2
        for k in (0, 50, 120, wl.size - 1):
            assert ref_dye.sigma(float(wl[k])) == pytest.approx(float(sg[k]), rel=1e-14)
        mids = 0.5 * (wl[:-1] + wl[1:])
        for k in range(0, mids.size, 7):
            val = ref_dye.sigma(float(mids[k]))
            lo, hi = sorted((sg[k], sg[k + 1]))
            assert lo - 1e-30 <= val <= hi + 1e-30
