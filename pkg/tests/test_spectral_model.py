import logging
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import brentq

from spdc_purity.errors import DegenerateInputError, GridMismatchError, InvalidParameterError
from spdc_purity.schmidt_analysis import purity
from spdc_purity.spectral_model import (
    SPEED_OF_LIGHT,
    FilterSpec,
    FrequencyGrid,
    JointSpectralAmplitude,
    PhaseMatching,
    PumpEnvelope,
    apply_filters,
    bandwidth_ghz_to_nm,
    bandwidth_nm_to_ghz,
    build_jsa,
    build_pef,
    build_pmf,
    default_grid,
    energy_mismatch,
    frequency_to_wavelength,
    wavelength_to_frequency,
)


class TestUnits:
    def test_speed_of_light_exact(self):
        assert SPEED_OF_LIGHT == 299792458.0

    def test_wavelength_round_trip(self):
        for lam in (775.55, 1547.1, 1555.1):
            assert frequency_to_wavelength(wavelength_to_frequency(lam)) == pytest.approx(lam, rel=1e-14)

    def test_1550_nm_is_193_THz(self):
        assert wavelength_to_frequency(1550.0) == pytest.approx(299792458.0 / 1550.0, rel=1e-15)

    def test_bandwidth_conversion(self):
        # d(nu) = c d(lambda) / lambda^2
        assert bandwidth_nm_to_ghz(1.0, 1551.1) == pytest.approx(299792458.0 / 1551.1**2, rel=1e-14)
        assert bandwidth_ghz_to_nm(bandwidth_nm_to_ghz(0.2, 1551.1), 1551.1) == pytest.approx(0.2)

    def test_channels_conserve_energy(self):
        pump = PumpEnvelope(fwhm=100.0)
        grid = FrequencyGrid.uniform(points=16)
        # the 0.05-nm rounding of the quoted wavelengths leaves a few GHz
        assert abs(energy_mismatch(pump, grid)) < 5.0


class TestFrequencyGrid:
    def test_uniform_spacing(self):
        g = FrequencyGrid.uniform(span=30, points=61)
        assert g.d_signal == pytest.approx(1.0)
        assert g.cell_area == pytest.approx(1.0)
        assert g.shape == (61, 61)

    @pytest.mark.parametrize("points", [2, 7])
    def test_too_few_points(self, points):
        with pytest.raises(InvalidParameterError):
            FrequencyGrid(1555.1, 1547.1, np.linspace(-1, 1, points), np.linspace(-1, 1, 16))

    def test_non_uniform_rejected(self):
        ax = np.linspace(-1, 1, 16)
        ax[3] += 0.01
        with pytest.raises(InvalidParameterError):
            FrequencyGrid(1555.1, 1547.1, ax, np.linspace(-1, 1, 16))

    def test_decreasing_rejected(self):
        with pytest.raises(InvalidParameterError):
            FrequencyGrid(1555.1, 1547.1, np.linspace(1, -1, 16), np.linspace(-1, 1, 16))

    def test_mesh_indexing(self):
        g = FrequencyGrid.uniform(span=4, points=9, idler_points=11)
        ns, ni = g.mesh()
        assert ns.shape == (9, 11)
        assert np.all(ns[:, 0] == g.signal_detunings)
        assert np.all(ni[0, :] == g.idler_detunings)


class TestPumpEnvelope:
    grid = FrequencyGrid.uniform(span=100, points=201)

    @pytest.mark.parametrize("shape", ["gaussian", "sech2"])
    def test_peak_and_half_point(self, shape):
        pump = PumpEnvelope(fwhm=100.0, shape=shape)
        assert pump(0.0) == pytest.approx(1.0)
        assert pump(50.0) == pytest.approx(0.5, abs=1e-12)
        assert pump(-50.0) == pytest.approx(0.5, abs=1e-12)

    def test_nm_width_converted(self):
        p = PumpEnvelope(fwhm=0.2, unit="nm", center_wavelength=775.55)
        assert p.fwhm_ghz == pytest.approx(bandwidth_nm_to_ghz(0.2, 775.55))

    @pytest.mark.parametrize("fwhm", [0.0, -3.0])
    def test_non_positive_width(self, fwhm):
        with pytest.raises(InvalidParameterError):
            PumpEnvelope(fwhm=fwhm)

    def test_pef_depends_on_sum_only(self):
        pump = PumpEnvelope(fwhm=37.0)
        nu_s, nu_i = np.array([3.0, -11.0, 20.0]), np.array([1.0, 4.0, -7.5])
        for d in (0.5, 7.0, -13.0):
            np.testing.assert_allclose(pump(nu_s + d + nu_i - d), pump(nu_s + nu_i), rtol=0, atol=1e-15)

    def test_pef_fwhm_along_sum_direction(self):
        pump = PumpEnvelope(fwhm=60.0)
        pef = build_pef(pump, self.grid)
        diag = np.diag(pef)  # nu_s = nu_i = x, sum = 2x
        x = self.grid.signal_detunings
        above = x[diag >= 0.5]
        # sum-width = 2 * (extent in x), sampled at 1 GHz in x
        assert 2 * (above[-1] - above[0]) == pytest.approx(60.0, rel=0.07)

    def test_pef_fwhm_fine_grid(self):
        pump = PumpEnvelope(fwhm=60.0)
        x = np.linspace(-40, 40, 80001)
        v = pump(2 * x)
        above = x[v >= 0.5]
        assert 2 * (above[-1] - above[0]) == pytest.approx(60.0, rel=0.01)

    def test_from_fundamental_filter(self):
        p = PumpEnvelope.from_fundamental_filter(1.0, shg_ratio=math.sqrt(2))
        assert p.fwhm_ghz == pytest.approx(math.sqrt(2) * bandwidth_nm_to_ghz(1.0, 1551.1))

    def test_far_pump_warns(self, caplog):
        grid = FrequencyGrid.uniform(points=16)
        with caplog.at_level(logging.WARNING):
            build_pef(PumpEnvelope(fwhm=100.0, center_wavelength=770.0), grid)
        assert "energy conservation" in caplog.text


class TestPhaseMatching:
    def test_sinc_half_constant(self):
        x = brentq(lambda u: math.sin(u) / u - 0.5, 1.0, 3.0, xtol=1e-15)
        pm = PhaseMatching(profile="sinc", theta=0.0, fwhm=10.0)
        assert pm(5.0, 0.0) == pytest.approx(0.5, abs=1e-12)
        assert x == pytest.approx(1.895494267033981, abs=1e-13)

    @pytest.mark.parametrize("profile", ["sinc", "gaussian"])
    def test_angle_model_antidiagonal_is_peak(self, profile):
        pm = PhaseMatching(profile=profile, theta=45.0, fwhm=25.0)
        nu = np.linspace(-50, 50, 11)
        np.testing.assert_allclose(np.abs(pm(nu, -nu)), 1.0, atol=1e-12)

    def test_taylor_first_sinc_zero(self):
        pm = PhaseMatching(model="taylor_model", gd_signal=0.3, gd_idler=0.1, length=10.0)
        # choose nu_s so that dk L / 2 = pi with nu_i = 0
        nu_s = 2 * math.pi / (pm.gd_signal * 2 * math.pi * 1e-3 * pm.length)
        assert abs(pm(nu_s, 0.0)) < 1e-15
        assert abs(pm(0.0, 0.0)) == pytest.approx(1.0)

    def test_taylor_phase_carried(self):
        pm = PhaseMatching(model="taylor_model", gd_signal=0.3, gd_idler=0.1, length=10.0)
        v = pm(20.0, -5.0)
        arg = pm.delta_k(20.0, -5.0) * pm.length / 2
        assert np.angle(v) == pytest.approx(arg)

    def test_taylor_equal_coefficients_constant_along_difference(self):
        sympy = pytest.importorskip("sympy")
        s, i, d, g = sympy.symbols("nu_s nu_i d g", real=True)
        k = 2 * sympy.pi * sympy.Rational(1, 1000)
        dk = g * k * s + g * k * i
        assert sympy.simplify(dk.subs({s: s + d, i: i - d}) - dk) == 0
        pm = PhaseMatching(model="taylor_model", gd_signal=0.25, gd_idler=0.25, length=8.0)
        grid = FrequencyGrid.uniform(span=40, points=33)
        phi = build_pmf(pm, grid)
        # anti-diagonals (constant nu_s + nu_i) are constant
        flipped = phi[:, ::-1]
        for off in range(-10, 11):
            line = np.diagonal(flipped, offset=off)
            np.testing.assert_allclose(line, line[0], atol=1e-12)

    def test_zero_length_rejected(self):
        with pytest.raises(InvalidParameterError):
            PhaseMatching(model="taylor_model", length=0.0)

    @given(st.floats(-200, 200), st.floats(-200, 200), st.floats(1, 180))
    def test_magnitude_bounded(self, nu_s, nu_i, theta):
        pm = PhaseMatching(theta=theta, fwhm=30.0)
        assert abs(pm(nu_s, nu_i)) <= 1.0 + 1e-15


class TestFilterSpec:
    @pytest.mark.parametrize("shape", ["gaussian", "lorentzian", "supergaussian"])
    def test_half_point_and_symmetry(self, shape):
        f = FilterSpec(fwhm=4.0, shape=shape, center=1.0, peak=0.8)
        assert f.transmission(1.0) == pytest.approx(0.8)
        assert f.transmission(3.0) == pytest.approx(0.4)
        nu = np.linspace(0, 10, 21)
        np.testing.assert_allclose(f.transmission(1 + nu), f.transmission(1 - nu))
        assert np.all(f.transmission(np.linspace(-30, 30, 301)) <= 0.8 + 1e-15)

    def test_nm_center(self):
        f = FilterSpec(fwhm=4.0, center=1555.1, center_unit="nm")
        assert f.transmission(0.0, axis_center_nm=1555.1) == pytest.approx(1.0)
        with pytest.raises(InvalidParameterError):
            f.transmission(0.0)

    @pytest.mark.parametrize("kw", [dict(peak=0.0), dict(peak=1.5), dict(fwhm=-1.0),
                                    dict(shape="supergaussian", order=1), dict(shape="boxcar")])
    def test_invalid(self, kw):
        with pytest.raises(InvalidParameterError):
            FilterSpec(**kw)


def _gauss_jsa(grid, sum_w, diff_w):
    ns, ni = grid.mesh()
    return JointSpectralAmplitude(grid, np.exp(-((ns + ni) / sum_w) ** 2 - ((ns - ni) / diff_w) ** 2)).normalize()


class TestJsa:
    grid = FrequencyGrid.uniform(span=30, points=128)

    def test_normalize_idempotent(self, rng):
        vals = rng.normal(size=self.grid.shape) + 1j * rng.normal(size=self.grid.shape)
        j = JointSpectralAmplitude(self.grid, vals).normalize()
        assert j.norm**2 == pytest.approx(1.0, abs=1e-12)
        np.testing.assert_array_equal(j.normalize().values, j.values)

    def test_values_read_only(self):
        j = _gauss_jsa(self.grid, 10, 10)
        with pytest.raises(ValueError):
            j.values[0, 0] = 1.0

    def test_round_gaussian_is_separable(self):
        pump = PumpEnvelope(fwhm=20.0)
        pm = PhaseMatching(profile="gaussian", theta=135.0, fwhm=20.0 / math.sqrt(2))
        jsa = build_jsa(build_pef(pump, self.grid), build_pmf(pm, self.grid), self.grid)
        assert jsa.provenance == "model"
        assert purity(jsa) == pytest.approx(1.0, abs=1e-6)

    def test_grid_mismatch(self):
        other = FrequencyGrid.uniform(span=30, points=64)
        pef = build_pef(PumpEnvelope(fwhm=20.0), other)
        with pytest.raises(GridMismatchError):
            build_jsa(pef, np.ones(self.grid.shape), self.grid)

    def test_zero_product(self):
        with pytest.raises(DegenerateInputError):
            build_jsa(np.zeros(self.grid.shape), np.ones(self.grid.shape), self.grid)

    def test_csv_long_format(self):
        g = FrequencyGrid.uniform(span=1, points=8)
        text = _gauss_jsa(g, 1, 1).to_csv()
        lines = text.strip().split("\n")
        assert lines[0] == "nu_s_GHz,nu_i_GHz,re,im"
        assert len(lines) == 1 + 64


class TestApplyFilters:
    grid = FrequencyGrid.uniform(span=30, points=128)

    def test_all_pass_identity(self):
        jsa = _gauss_jsa(self.grid, 10, 30)
        flat = FilterSpec(shape="flat")
        out, t = apply_filters(jsa, flat, flat)
        np.testing.assert_array_equal(out.values, jsa.values)
        assert t == 1.0

    def test_flat_peak_half(self):
        jsa = _gauss_jsa(self.grid, 10, 30)
        half = FilterSpec(shape="flat", peak=0.5)
        assert apply_filters(jsa, half, half)[1] == pytest.approx(0.0625)
        assert apply_filters(jsa, half, None)[1] == pytest.approx(0.25)

    def test_not_renormalized(self):
        jsa = _gauss_jsa(self.grid, 10, 30)
        out, t = apply_filters(jsa, FilterSpec(fwhm=4.0), FilterSpec(fwhm=4.0))
        assert out.norm**2 == pytest.approx(t)
        assert 0 < t < 1

    def test_narrow_filters_raise_purity(self):
        jsa = _gauss_jsa(self.grid, 10, 30)
        out, _ = apply_filters(jsa, FilterSpec(fwhm=4.0), FilterSpec(fwhm=4.0))
        assert purity(out) > purity(jsa)

    def test_filter_outside_grid_warns(self, caplog):
        jsa = _gauss_jsa(self.grid, 10, 30)
        with caplog.at_level(logging.WARNING):
            out, t = apply_filters(jsa, FilterSpec(fwhm=4.0, center=500.0), None)
        assert "outside the grid" in caplog.text
        assert t < 1e-12


class TestDefaultGrid:
    def test_rule(self):
        pump = PumpEnvelope(fwhm=50.0)
        pm = PhaseMatching(fwhm=80.0)
        g = default_grid(pump, pm, [FilterSpec(fwhm=20.0)])
        assert g.signal_detunings[-1] == pytest.approx(240.0)
        assert g.shape == (256, 256)


class TestPresetSpectra:
    @pytest.mark.parametrize("name,target", [("paper_fig2b", 0.86), ("paper_fig2c", 0.98)])
    def test_target_purities(self, presets, name, target):
        assert presets[name].purity() == pytest.approx(target, abs=0.05)

    @pytest.mark.parametrize("name", ["paper_fig2b", "paper_fig2c", "fig3b", "fig3c", "fig3d"])
    def test_grid_refinement(self, name):
        from spdc_purity.presets import preset
        assert abs(preset(name, points=128).purity() - preset(name, points=256).purity()) < 1e-3

    @pytest.mark.parametrize("name", ["paper_fig2b", "fig3b", "fig3d"])
    def test_filtering_never_lowers_purity(self, presets, name):
        sc = presets[name]
        assert sc.purity() >= purity(sc.source_jsa()) - 1e-12
        narrower = sc.with_(signal_filters=sc.signal_filters + (FilterSpec(fwhm=4.0),),
                            detection_filters=(FilterSpec(fwhm=4.0),))
        assert narrower.purity() >= sc.purity()


@settings(max_examples=30, deadline=None)
@given(st.floats(1, 100), st.floats(1, 100))
def test_gaussian_jsa_normalized(sum_w, diff_w):
    g = FrequencyGrid.uniform(span=30, points=32)
    assert _gauss_jsa(g, sum_w, diff_w).norm == pytest.approx(1.0, abs=1e-12)
