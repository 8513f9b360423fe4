"""Calibrated source model and the named experimental configurations.

Two source constants are fitted, not measured: the PMF width (type-0 PPLN,
PMF parallel to the pump envelope, theta = 45 deg) and the ratio of SHG pump
bandwidth to fundamental filter bandwidth. They are fitted to the purity of
the 0.2-nm-pump JSI (0.86) and to the 4-nm / 1-nm three-fold rate ratio
(20/30). One detection-efficiency ratio is then fitted to the 1-nm HOM
visibility (0.655). Everything else is a prediction of these three numbers.
Re-run :func:`calibrate_source` and :func:`calibrate_noise` to regenerate them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import brentq

from .hom_interference import HomCurve, NoiseModel, WcpSource, heralded_state, hom_curve
from .schmidt_analysis import purity as jsa_purity
from .spectral_model import (
    FilterSpec,
    FrequencyGrid,
    JointSpectralAmplitude,
    PhaseMatching,
    PumpEnvelope,
    apply_filters,
    bandwidth_nm_to_ghz,
    build_jsa,
    build_pef,
    build_pmf,
)

SIGNAL_NM = 1555.1
IDLER_NM = 1547.1
PUMP_NM = 775.55
FUNDAMENTAL_NM = 1551.1

TARGET_PURITY_FIG2B = 0.86
TARGET_RATE_FIG3D_OVER_FIG3B = 20.0 / 30.0
TARGET_VISIBILITY_FIG3B = 0.655


@dataclass(frozen=True)
class Calibration:
    pmf_theta: float = 45.0
    pmf_fwhm: float = 88.67998909
    pmf_profile: str = "sinc"
    shg_bandwidth_ratio: float = 0.8066285933
    efficiency_ratio: float = 0.9060368651
    pair_rate: float = 0.01
    mu: float = 0.01


CALIBRATION = Calibration()

WDM = 20.0  # GHz, flat-top channel filter
FBG = 4.0  # GHz, Gaussian grating


def wdm_filter(fwhm=WDM, order=3):
    return FilterSpec(fwhm=fwhm, shape="supergaussian", order=order)


def fbg_filter(fwhm=FBG):
    return FilterSpec(fwhm=fwhm, shape="gaussian")


def calibrated_pmf(cal: Calibration = CALIBRATION) -> PhaseMatching:
    return PhaseMatching(model="angle_model", profile=cal.pmf_profile, theta=cal.pmf_theta, fwhm=cal.pmf_fwhm)


def pump_for(filter_nm, cal: Calibration = CALIBRATION) -> PumpEnvelope:
    """SHG pump envelope for a fundamental band-pass of ``filter_nm``."""
    fwhm = cal.shg_bandwidth_ratio * bandwidth_nm_to_ghz(filter_nm, FUNDAMENTAL_NM)
    return PumpEnvelope(fwhm=fwhm, center_wavelength=PUMP_NM)


def preset_grid(points=256, span=30.0) -> FrequencyGrid:
    # +-30 GHz matches the FBG tuning range used for the JSI scans
    return FrequencyGrid.uniform(SIGNAL_NM, IDLER_NM, span, points)


def default_delays(max_ps=2000.0, step_ps=5.0):
    n = int(round(max_ps / step_ps))
    return np.linspace(-n * step_ps, n * step_ps, 2 * n + 1)


@dataclass(frozen=True, eq=False)
class Scenario:
    """One experimental configuration: source, filters, WCP and noise.

    ``signal_filters`` sit in the herald path, ``idler_filters`` on the idler
    before the beam splitter, ``detection_filters`` after it (they act on the
    WCP too when ``detection_filters_on_wcp``). ``wcp_filters`` carve the WCP
    from the laser.
    """

    name: str
    pump: PumpEnvelope
    phase_matching: PhaseMatching
    grid: FrequencyGrid
    signal_filters: tuple = ()
    idler_filters: tuple = ()
    detection_filters: tuple = ()
    wcp_filters: tuple = ()
    detection_filters_on_wcp: bool = True
    mu: float = CALIBRATION.mu
    pair_rate: float = CALIBRATION.pair_rate
    noise: NoiseModel | None = field(default_factory=lambda: NoiseModel(CALIBRATION.efficiency_ratio))
    delays: np.ndarray = field(default_factory=default_delays)
    description: str = ""

    def with_(self, **changes) -> "Scenario":
        return replace(self, **changes)

    @property
    def idler_side_filters(self):
        return tuple(self.idler_filters) + tuple(self.detection_filters)

    def source_jsa(self) -> JointSpectralAmplitude:
        """Unfiltered PEF x PMF on the grid, normalized."""
        return build_jsa(build_pef(self.pump, self.grid), build_pmf(self.phase_matching, self.grid), self.grid)

    def jsa(self) -> JointSpectralAmplitude:
        """Filtered, normalized JSA as seen by the detectors."""
        out, _ = apply_filters(self.source_jsa(), self.signal_filters or None, self.idler_side_filters or None)
        return out.normalize()

    def purity(self) -> float:
        return jsa_purity(self.jsa())

    def heralded(self):
        return heralded_state(self.source_jsa(), idler_filter=self.idler_side_filters or None,
                              signal_filter=self.signal_filters or None, heralding_arm="signal")

    def heralding_efficiency(self) -> float:
        from .rate_model import heralding_efficiency
        return heralding_efficiency(self.pump, self.phase_matching, self.grid,
                                    self.signal_filters, self.idler_side_filters)

    def wcp_source(self) -> WcpSource:
        """WCP (mu set at the beam-splitter input) as seen by the detectors."""
        g = self.grid
        wcp = WcpSource.from_filters(self.wcp_filters or None, g.idler_detunings, g.idler_center, self.mu)
        if self.detection_filters_on_wcp and self.detection_filters:
            wcp = wcp.filtered(self.detection_filters, g.idler_center)
        return wcp

    def wcp_transmission(self) -> float:
        g = self.grid
        wcp = WcpSource.from_filters(self.wcp_filters or None, g.idler_detunings, g.idler_center, self.mu)
        if self.detection_filters_on_wcp and self.detection_filters:
            return wcp.transmission(self.detection_filters, g.idler_center)
        return 1.0

    def hom(self, delays=None, noise: NoiseModel | None | str = "scenario") -> HomCurve:
        noise_model = self.noise if noise == "scenario" else noise
        state = self.heralded()
        h = self.heralding_efficiency()
        d = self.delays if delays is None else delays
        return hom_curve(state.rho, h, self.wcp_source(), self.pair_rate, d, noise_model, state.purity)

    def rates(self):
        from .rate_model import estimate_rates
        return estimate_rates(self)


def make_scenario(name, pump_nm, fbg=False, cal: Calibration = CALIBRATION, points=256, **kw) -> Scenario:
    """Scenario with 20-GHz WDM channels, optionally plus 4-GHz FBGs before the detectors."""
    extra = (fbg_filter(),) if fbg else ()
    return Scenario(
        name=name,
        pump=pump_for(pump_nm, cal),
        phase_matching=calibrated_pmf(cal),
        grid=preset_grid(points),
        signal_filters=(wdm_filter(),) + extra,
        idler_filters=(wdm_filter(),),
        detection_filters=extra,
        wcp_filters=(wdm_filter(),),
        mu=cal.mu,
        pair_rate=cal.pair_rate,
        noise=NoiseModel(cal.efficiency_ratio),
        **kw,
    )


_PRESET_ARGS = {
    "paper_fig2b": (0.2, False, "0.2-nm pump filter, 20-GHz WDM channels (JSI scan)"),
    "paper_fig2c": (5.0, False, "5-nm pump filter, 20-GHz WDM channels (JSI scan)"),
    "fig3b": (1.0, False, "1-nm pump filter, 20-GHz filters"),
    "fig3c": (1.0, True, "1-nm pump filter, 20-GHz filters plus 4-GHz FBGs"),
    "fig3d": (4.0, False, "4-nm pump filter, 20-GHz filters"),
}

PRESET_NAMES = tuple(_PRESET_ARGS)


def preset(name, cal: Calibration = CALIBRATION, points=256) -> Scenario:
    try:
        pump_nm, fbg, desc = _PRESET_ARGS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; available: {', '.join(PRESET_NAMES)}") from None
    return make_scenario(name, pump_nm, fbg, cal, points, description=desc)


def correlated_gaussian(ratio=3.0, width=10.0, points=256, span=None) -> JointSpectralAmplitude:
    """Gaussian JSA with sum width ``width`` and difference width ``ratio*width``.

    Its Schmidt spectrum is geometric, lambda_n = (1 - q^2) q^(2n) with
    q = (ratio - 1)/(ratio + 1), so the purity is (1 - q^2)/(1 + q^2).
    """
    span = 4.0 * ratio * width if span is None else span
    grid = FrequencyGrid.uniform(SIGNAL_NM, IDLER_NM, span, points)
    ns, ni = grid.mesh()
    vals = np.exp(-((ns + ni) / width) ** 2 - ((ns - ni) / (ratio * width)) ** 2)
    return JointSpectralAmplitude(grid, vals).normalize()


def analytic_gaussian_purity(ratio):
    q = (ratio - 1.0) / (ratio + 1.0)
    return (1 - q * q) / (1 + q * q)


# ---------------------------------------------------------------- calibration

def _purity_fig2b(pmf_fwhm, shg_ratio, points=256):
    cal = replace(CALIBRATION, pmf_fwhm=pmf_fwhm, shg_bandwidth_ratio=shg_ratio)
    return preset("paper_fig2b", cal, points).purity()


def _rate_ratio_d_b(pmf_fwhm, shg_ratio):
    from .rate_model import relative_threefold_rate
    cal = replace(CALIBRATION, pmf_fwhm=pmf_fwhm, shg_bandwidth_ratio=shg_ratio)
    return relative_threefold_rate(preset("fig3d", cal), preset("fig3b", cal)).ratio


def calibrate_source(tol=1e-10):
    """Fit (pmf_fwhm, shg_bandwidth_ratio) to the 0.86 purity and the 20/30 rate ratio."""

    def shg_for(pmf_fwhm):
        return brentq(lambda k: _purity_fig2b(pmf_fwhm, k) - TARGET_PURITY_FIG2B, 0.3, 1.5, xtol=tol)

    def resid(pmf_fwhm):
        return _rate_ratio_d_b(pmf_fwhm, shg_for(pmf_fwhm)) - TARGET_RATE_FIG3D_OVER_FIG3B

    w = brentq(resid, 60.0, 200.0, xtol=1e-8)
    return w, shg_for(w)


def visibility_for(scenario: Scenario, efficiency_ratio) -> float:
    noise = replace(scenario.noise or NoiseModel(), efficiency_ratio=efficiency_ratio)
    return scenario.hom(noise=noise).visibility


def calibrate_noise(cal: Calibration = CALIBRATION, target=TARGET_VISIBILITY_FIG3B):
    """Efficiency ratio putting fig3b at ``target`` visibility.

    The visibility peaks at a = mu / sqrt(2 p (1 + P)); the solution is taken
    on the multi-pair-limited side (larger efficiency ratio).
    """
    sc = preset("fig3b", cal)
    h = sc.heralding_efficiency()
    p_her = sc.heralded().purity
    mu_eff = sc.wcp_source().mu
    eta_peak = mu_eff / math.sqrt(2 * sc.pair_rate * (1 + p_her)) / h
    f = lambda eta: visibility_for(sc, eta) - target  # noqa: E731
    hi = eta_peak
    while f(hi) > 0:
        hi *= 2
    return brentq(f, eta_peak, hi, xtol=1e-12)
