"""Relative three-fold coincidence rates from spectral transmission bookkeeping.

The source is normalized to a fixed pair number per unit difference
frequency ``nu_s - nu_i`` at the channel centre: type-0 emission is far
broader than any channel along that direction, so a fixed pairs-per-pulse
setting fixes this density. Rates are then

    threefold ~ herald_bandwidth * idler_transmission * wcp_transmission

with ``herald_bandwidth`` the in-band signal rate (GHz, per unit density),
``idler_transmission`` the probability that the partner photon passes the
idler-side filters given a herald, and ``wcp_transmission`` the fraction of
the WCP passing the detection filters. Absolute rates are out of reach;
only ratios are meaningful.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError
from .spectral_model import PhaseMatching, PumpEnvelope, combined_transmission, source_amplitude

# integration window and step in units of the narrowest source width
_SPAN_WIDTHS = 200.0
_STEPS_PER_WIDTH = 16.0


def _pm_width(pm: PhaseMatching, ds, di):
    """FWHM of the PMF along the direction (ds, di) in (nu_s, nu_i) space."""
    if pm.model == "angle_model":
        th = math.radians(pm.theta)
        proj = abs(ds * math.cos(th) + di * math.sin(th))
        return math.inf if proj < 1e-12 else pm.fwhm / proj
    proj = abs(pm.gd_signal * ds + pm.gd_idler * di) * 2 * math.pi * 1e-3 * pm.length / 2
    return math.inf if proj < 1e-15 else 2 * 1.895494267033981 / proj


def _axis(width):
    step = width / _STEPS_PER_WIDTH
    n = int(round(_SPAN_WIDTHS * width / step))
    return np.linspace(-n * step, n * step, 2 * n + 1)


def spectral_density(pump: PumpEnvelope, pm: PhaseMatching):
    """Pairs per unit difference frequency at the channel centre (unnormalized)."""
    w = min(pump.fwhm_ghz, _pm_width(pm, 0.5, 0.5))
    s = _axis(w) + pump.offset
    f = source_amplitude(pump, pm, s / 2, s / 2)
    return 0.5 * np.trapezoid(np.abs(f) ** 2, s)


def herald_bandwidth(pump, pm, grid, signal_filters):
    """Signal-arm rate through ``signal_filters`` with the idler unconstrained."""
    w = min(pump.fwhm_ghz, _pm_width(pm, 0.0, 1.0))
    nu_i = _axis(w)
    ts = combined_transmission(signal_filters, grid.signal_detunings, grid.signal_center)
    on = np.abs(ts) > 0
    nu_s = grid.signal_detunings[on]
    # centre the idler window on the energy-conservation line of each signal bin
    nu_i2 = nu_i[None, :] + (pump.offset - nu_s)[:, None]
    f = source_amplitude(pump, pm, nu_s[:, None], nu_i2)
    inner = np.trapezoid(np.abs(f) ** 2, nu_i, axis=1)
    return float(np.sum(np.abs(ts[on]) ** 2 * inner) * grid.d_signal / spectral_density(pump, pm))


def pair_bandwidth(pump, pm, grid, signal_filters, idler_filters):
    """Coincidence rate with both arms filtered (grid quadrature)."""
    ns, ni = grid.mesh()
    ts = combined_transmission(signal_filters, grid.signal_detunings, grid.signal_center)
    ti = combined_transmission(idler_filters, grid.idler_detunings, grid.idler_center)
    f = source_amplitude(pump, pm, ns, ni) * ts[:, None] * ti[None, :]
    return float(np.sum(np.abs(f) ** 2) * grid.cell_area / spectral_density(pump, pm))


def heralding_efficiency(pump, pm, grid, signal_filters, idler_filters):
    """Probability that the partner passes ``idler_filters`` given a herald."""
    h = herald_bandwidth(pump, pm, grid, signal_filters)
    if h == 0:
        return 0.0
    return min(1.0, pair_bandwidth(pump, pm, grid, signal_filters, idler_filters) / h)


@dataclass(frozen=True)
class RateEstimate:
    config_id: str
    herald_bandwidth: float
    idler_transmission: float
    wcp_transmission: float
    pair_rate: float = 0.01
    mu: float = 0.01

    def __post_init__(self):
        for name in ("idler_transmission", "wcp_transmission"):
            v = getattr(self, name)
            if not 0 <= v <= 1 + 1e-12:
                raise InvalidParameterError(f"{name} must lie in [0, 1], got {v}")

    @property
    def threefold(self):
        return self.herald_bandwidth * self.idler_transmission * self.wcp_transmission

    def to_dict(self):
        return {
            "config": self.config_id,
            "herald_bandwidth_GHz": _round(self.herald_bandwidth),
            "idler_transmission": _round(self.idler_transmission),
            "wcp_transmission": _round(self.wcp_transmission),
            "threefold_relative": _round(self.threefold),
        }


@dataclass(frozen=True)
class RateComparison:
    numerator: RateEstimate
    denominator: RateEstimate
    ratio: float | None

    @property
    def measurable(self):
        return self.ratio is not None

    def __float__(self):
        return math.inf if self.ratio is None else float(self.ratio)

    def to_dict(self):
        return {
            "config_a": self.numerator.to_dict(),
            "config_b": self.denominator.to_dict(),
            "ratio": None if self.ratio is None else _round(self.ratio),
            "status": "ok" if self.measurable else "unmeasurable",
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _round(x, digits=12):
    return float(f"{float(x):.{digits}g}")


def estimate_rates(scenario) -> RateEstimate:
    """Rate factors of a :class:`spdc_purity.presets.Scenario`."""
    sc = scenario
    idler_side = tuple(sc.idler_filters) + tuple(sc.detection_filters)
    h = herald_bandwidth(sc.pump, sc.phase_matching, sc.grid, sc.signal_filters)
    eff = 0.0 if h == 0 else min(1.0, pair_bandwidth(sc.pump, sc.phase_matching, sc.grid,
                                                      sc.signal_filters, idler_side) / h)
    return RateEstimate(sc.name, h, eff, sc.wcp_transmission(), sc.pair_rate, sc.mu)


def relative_threefold_rate(a, b) -> RateComparison:
    """Three-fold rate of configuration ``a`` over ``b``.

    Arguments are :class:`RateEstimate` or scenarios. A zero rate in ``b``
    gives an explicit unmeasurable result instead of infinity.
    """
    ra = a if isinstance(a, RateEstimate) else estimate_rates(a)
    rb = b if isinstance(b, RateEstimate) else estimate_rates(b)
    if not (math.isclose(ra.pair_rate, rb.pair_rate) and math.isclose(ra.mu, rb.mu)):
        raise InvalidParameterError("rate comparison needs the same pair rate p and WCP mu")
    if rb.threefold <= 0:
        return RateComparison(ra, rb, None)
    return RateComparison(ra, rb, ra.threefold / rb.threefold)
