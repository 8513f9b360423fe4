import json
import math

import numpy as np
import pytest
from scipy.integrate import dblquad, quad

from spdc_purity.errors import InvalidParameterError
from spdc_purity.presets import fbg_filter, wdm_filter
from spdc_purity.rate_model import (
    RateEstimate,
    estimate_rates,
    herald_bandwidth,
    pair_bandwidth,
    relative_threefold_rate,
    spectral_density,
)
from spdc_purity.spectral_model import FilterSpec, FrequencyGrid, PhaseMatching, PumpEnvelope

PUMP = PumpEnvelope(fwhm=40.0)
PM = PhaseMatching(profile="gaussian", theta=135.0, fwhm=60.0)
GRID = FrequencyGrid.uniform(span=30, points=241)
LN2 = math.log(2)


def source_power(s, i):
    pef = math.exp(-LN2 * (2 * (s + i) / 40.0) ** 2)
    u = (i - s) / math.sqrt(2)
    return (pef * math.exp(-LN2 * (2 * u / 60.0) ** 2)) ** 2


def gauss_t2(nu, fwhm):
    return math.exp(-2 * LN2 * (2 * nu / fwhm) ** 2)


class TestQuadratureOracles:
    def test_density(self):
        ref = 0.5 * quad(lambda x: source_power(x / 2, x / 2), -np.inf, np.inf)[0]
        assert spectral_density(PUMP, PM) == pytest.approx(ref, rel=1e-9)

    def test_herald_bandwidth(self):
        d = 0.5 * quad(lambda x: source_power(x / 2, x / 2), -np.inf, np.inf)[0]
        ref = dblquad(lambda i, s: gauss_t2(s, 4.0) * source_power(s, i), -30, 30, -np.inf, np.inf)[0] / d
        got = herald_bandwidth(PUMP, PM, GRID, FilterSpec(fwhm=4.0))
        assert got == pytest.approx(ref, rel=1e-3)

    def test_pair_bandwidth(self):
        d = 0.5 * quad(lambda x: source_power(x / 2, x / 2), -np.inf, np.inf)[0]
        ref = dblquad(lambda i, s: gauss_t2(s, 4.0) * gauss_t2(i, 8.0) * source_power(s, i),
                      -30, 30, -30, 30)[0] / d
        got = pair_bandwidth(PUMP, PM, GRID, FilterSpec(fwhm=4.0), FilterSpec(fwhm=8.0))
        assert got == pytest.approx(ref, rel=1e-3)


class TestRateEstimate:
    def test_product_of_factors(self):
        r = RateEstimate("x", 3.0, 0.5, 0.2)
        assert r.threefold == pytest.approx(0.3)
        d = r.to_dict()
        assert d["threefold_relative"] == pytest.approx(0.3)

    @pytest.mark.parametrize("field", ["idler_transmission", "wcp_transmission"])
    def test_transmissions_bounded(self, field):
        kw = {"idler_transmission": 0.5, "wcp_transmission": 0.5, field: 1.5}
        with pytest.raises(InvalidParameterError):
            RateEstimate("x", 1.0, **kw)

    @pytest.mark.parametrize("name", ["fig3b", "fig3c", "fig3d"])
    def test_preset_factors(self, presets, name):
        r = estimate_rates(presets[name])
        assert r.herald_bandwidth > 0
        assert 0 < r.idler_transmission <= 1
        assert 0 < r.wcp_transmission <= 1
        assert r.threefold == pytest.approx(r.herald_bandwidth * r.idler_transmission * r.wcp_transmission)


class TestRelativeRates:
    def test_identical(self, presets):
        assert relative_threefold_rate(presets["fig3b"], presets["fig3b"]).ratio == pytest.approx(1.0, abs=1e-12)

    def test_fig3b_over_fig3c(self, presets):
        r = relative_threefold_rate(presets["fig3b"], presets["fig3c"]).ratio
        assert 1e2 <= r <= 1e4
        assert 1200 / 10 <= r <= 1200 * 10

    def test_fig3d_over_fig3b(self, presets):
        r = relative_threefold_rate(presets["fig3d"], presets["fig3b"]).ratio
        assert 0.3 <= r <= 1.5

    def test_composition(self, presets):
        a, b, c = (estimate_rates(presets[n]) for n in ("fig3d", "fig3b", "fig3c"))
        ac = relative_threefold_rate(a, c).ratio
        ab_bc = relative_threefold_rate(a, b).ratio * relative_threefold_rate(b, c).ratio
        assert ac == pytest.approx(ab_bc, rel=1e-12)

    def test_zero_denominator_unmeasurable(self):
        a = RateEstimate("a", 1.0, 0.5, 0.5)
        b = RateEstimate("b", 1.0, 0.0, 0.5)
        cmp = relative_threefold_rate(a, b)
        assert not cmp.measurable
        assert math.isinf(float(cmp))
        assert json.loads(cmp.to_json())["status"] == "unmeasurable"

    def test_needs_same_p_and_mu(self, presets):
        sc = presets["fig3b"]
        with pytest.raises(InvalidParameterError):
            relative_threefold_rate(sc, sc.with_(pair_rate=0.02))
        with pytest.raises(InvalidParameterError):
            relative_threefold_rate(sc, sc.with_(mu=0.05))

    def test_json_report(self, presets):
        d = json.loads(relative_threefold_rate(presets["fig3d"], presets["fig3b"]).to_json())
        assert d["status"] == "ok"
        assert d["config_a"]["config"] == "fig3d"


class TestMonotonicity:
    widths = np.linspace(40.0, 2.0, 10)

    @pytest.mark.parametrize("slot", ["signal_filters", "idler_filters", "detection_filters", "wcp_filters"])
    def test_narrowing_never_increases_rate(self, presets, slot):
        base = presets["fig3b"]
        rates = []
        for w in self.widths:
            f = (fbg_filter(w),) if slot == "detection_filters" else (wdm_filter(w),)
            sc = base.with_(**{slot: f})
            rates.append(estimate_rates(sc).threefold)
        assert np.all(np.diff(rates) <= 1e-12 * max(rates))

    def test_fbg_sweep(self, presets):
        base = presets["fig3c"]
        rates = [estimate_rates(base.with_(signal_filters=(wdm_filter(), fbg_filter(w)),
                                           detection_filters=(fbg_filter(w),))).threefold
                 for w in self.widths]
        assert np.all(np.diff(rates) <= 0)
