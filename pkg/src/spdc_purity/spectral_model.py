"""Joint spectral amplitude of SPDC pairs on a discrete detuning grid.

All frequencies are detunings in GHz from a per-arm centre wavelength. The
joint amplitude is the product of a pump envelope (a function of the detuning
sum) and a phase-matching function, optionally multiplied by per-arm filter
transfer functions.

Width convention: every ``fwhm`` in this module is the full width at half
maximum of the function as evaluated, i.e. of the *amplitude* profile. A
Gaussian pump with ``fwhm=100`` evaluates to 0.5 at a detuning sum of 50 GHz,
and a filter with ``fwhm=4`` has amplitude transmission ``peak/2`` at +-2 GHz.
"""

from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from .errors import DegenerateInputError, GridMismatchError, InvalidParameterError

logger = logging.getLogger(__name__)

SPEED_OF_LIGHT = 299_792_458.0  # m/s, exact

# half-width arguments at which each profile falls to 0.5
_SECH2_HALF = math.acosh(math.sqrt(2.0))
_SINC_HALF = 1.895494267033981  # sin(x)/x = 0.5


def wavelength_to_frequency(wavelength_nm):
    """Optical frequency in GHz of a vacuum wavelength in nm."""
    return SPEED_OF_LIGHT / np.asarray(wavelength_nm, dtype=float)


def frequency_to_wavelength(frequency_ghz):
    return SPEED_OF_LIGHT / np.asarray(frequency_ghz, dtype=float)


def bandwidth_nm_to_ghz(width_nm, center_nm):
    """Convert a (small) wavelength width to a frequency width, c*dl/l^2."""
    return SPEED_OF_LIGHT * width_nm / center_nm**2


def bandwidth_ghz_to_nm(width_ghz, center_nm):
    return width_ghz * center_nm**2 / SPEED_OF_LIGHT


def _as_detunings(values, name):
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1:
        raise InvalidParameterError(f"{name} must be one-dimensional")
    if arr.size < 8:
        raise InvalidParameterError(f"{name} needs at least 8 points, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise InvalidParameterError(f"{name} contains non-finite values")
    steps = np.diff(arr)
    if np.any(steps <= 0):
        raise InvalidParameterError(f"{name} must be strictly increasing")
    step = (arr[-1] - arr[0]) / (arr.size - 1)
    if np.max(np.abs(steps - step)) > 1e-9 * abs(step) + 1e-12 * np.max(np.abs(arr)):
        raise InvalidParameterError(f"{name} must be uniformly spaced")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class FrequencyGrid:
    """Signal/idler detuning axes (GHz) around two centre wavelengths (nm)."""

    signal_center: float
    idler_center: float
    signal_detunings: np.ndarray
    idler_detunings: np.ndarray

    def __post_init__(self):
        if self.signal_center <= 0 or self.idler_center <= 0:
            raise InvalidParameterError("centre wavelengths must be positive")
        object.__setattr__(self, "signal_detunings", _as_detunings(self.signal_detunings, "signal_detunings"))
        object.__setattr__(self, "idler_detunings", _as_detunings(self.idler_detunings, "idler_detunings"))

    @classmethod
    def uniform(cls, signal_center=1555.1, idler_center=1547.1, span=30.0, points=256,
                idler_span=None, idler_points=None):
        """Symmetric grid of ``points`` samples over ``[-span, span]`` GHz per axis."""
        idler_span = span if idler_span is None else idler_span
        idler_points = points if idler_points is None else idler_points
        return cls(signal_center, idler_center,
                   np.linspace(-span, span, points),
                   np.linspace(-idler_span, idler_span, idler_points))

    @property
    def shape(self):
        return (self.signal_detunings.size, self.idler_detunings.size)

    @property
    def d_signal(self):
        s = self.signal_detunings
        return (s[-1] - s[0]) / (s.size - 1)

    @property
    def d_idler(self):
        i = self.idler_detunings
        return (i[-1] - i[0]) / (i.size - 1)

    @property
    def cell_area(self):
        return self.d_signal * self.d_idler

    @property
    def signal_frequency(self):
        """Absolute centre frequency of the signal axis in GHz."""
        return float(wavelength_to_frequency(self.signal_center))

    @property
    def idler_frequency(self):
        return float(wavelength_to_frequency(self.idler_center))

    def mesh(self):
        """Return ``(nu_s, nu_i)`` 2-D arrays indexed ``[signal, idler]``."""
        return np.meshgrid(self.signal_detunings, self.idler_detunings, indexing="ij")

    def matches(self, other: "FrequencyGrid") -> bool:
        return (
            self.signal_center == other.signal_center
            and self.idler_center == other.idler_center
            and self.shape == other.shape
            and np.array_equal(self.signal_detunings, other.signal_detunings)
            and np.array_equal(self.idler_detunings, other.idler_detunings)
        )


def _check_shape(name, kind, allowed):
    if kind not in allowed:
        raise InvalidParameterError(f"unknown {name} {kind!r}; expected one of {sorted(allowed)}")


@dataclass(frozen=True)
class PumpEnvelope:
    """Pump spectral amplitude, expressed as a function of the detuning sum.

    ``fwhm`` is in ``unit`` (GHz or nm at ``center_wavelength``).
    ``offset`` shifts the envelope peak to ``nu_s + nu_i = offset`` (GHz).
    """

    fwhm: float
    center_wavelength: float = 775.55
    unit: str = "GHz"
    shape: str = "gaussian"
    offset: float = 0.0

    def __post_init__(self):
        if not self.fwhm > 0:
            raise InvalidParameterError(f"pump fwhm must be positive, got {self.fwhm}")
        if not self.center_wavelength > 0:
            raise InvalidParameterError("pump centre wavelength must be positive")
        _check_shape("pump unit", self.unit, {"GHz", "nm"})
        _check_shape("pump shape", self.shape, {"gaussian", "sech2"})

    @classmethod
    def from_fundamental_filter(cls, filter_nm, fundamental_nm=1551.1, shg_ratio=None,
                                center_wavelength=775.55, shape="gaussian"):
        """Pump envelope after SHG of a fundamental cut by a ``filter_nm`` band-pass.

        The envelope width is ``shg_ratio`` times the fundamental bandwidth in
        frequency; ``None`` uses the calibrated ratio from :mod:`spdc_purity.presets`.
        """
        if not filter_nm > 0:
            raise InvalidParameterError("fundamental filter width must be positive")
        if shg_ratio is None:
            from .presets import CALIBRATION
            shg_ratio = CALIBRATION.shg_bandwidth_ratio
        fwhm = shg_ratio * bandwidth_nm_to_ghz(filter_nm, fundamental_nm)
        return cls(fwhm=fwhm, center_wavelength=center_wavelength, unit="GHz", shape=shape)

    @property
    def fwhm_ghz(self):
        if self.unit == "GHz":
            return float(self.fwhm)
        return float(bandwidth_nm_to_ghz(self.fwhm, self.center_wavelength))

    def __call__(self, nu_sum):
        """Envelope amplitude at detuning sum(s) ``nu_sum`` (GHz); peak 1."""
        x = (np.asarray(nu_sum, dtype=float) - self.offset) / (self.fwhm_ghz / 2)
        if self.shape == "gaussian":
            return np.exp(-math.log(2.0) * x**2)
        y = np.clip(x * _SECH2_HALF, -700, 700)
        return 1.0 / np.cosh(y) ** 2


@dataclass(frozen=True)
class PhaseMatching:
    """Phase-matching function, either pictorial (angle) or physical (Taylor).

    angle_model: ``profile(u)`` with ``u = nu_s cos(theta) + nu_i sin(theta)``
    and FWHM ``fwhm`` (GHz) along ``u``; real valued.

    taylor_model: ``dk = 2*pi*(gd_signal*nu_s + gd_idler*nu_i)*1e-3
    - gvd/2 * (2*pi*1e-3)**2 * (nu_s**2 + nu_i**2)`` in rad/mm, with
    group-delay mismatches in ps/mm and ``gvd`` in ps^2/mm. The sinc profile
    then carries the phase ``exp(i dk L/2)``.
    """

    model: str = "angle_model"
    profile: str = "sinc"
    theta: float = 45.0
    fwhm: float = 100.0
    length: float = 10.0
    gd_signal: float = 0.3
    gd_idler: float = 0.3
    gvd: float = 0.0

    def __post_init__(self):
        _check_shape("phase-matching model", self.model, {"angle_model", "taylor_model"})
        _check_shape("phase-matching profile", self.profile, {"sinc", "gaussian"})
        if self.model == "angle_model" and not self.fwhm > 0:
            raise InvalidParameterError(f"phase-matching fwhm must be positive, got {self.fwhm}")
        if self.model == "taylor_model" and not self.length > 0:
            raise InvalidParameterError(f"crystal length must be positive, got {self.length}")

    def delta_k(self, nu_s, nu_i):
        """Phase mismatch in rad/mm (taylor_model only)."""
        w_s = 2 * np.pi * 1e-3 * np.asarray(nu_s, dtype=float)  # rad/ps
        w_i = 2 * np.pi * 1e-3 * np.asarray(nu_i, dtype=float)
        return self.gd_signal * w_s + self.gd_idler * w_i - 0.5 * self.gvd * (w_s**2 + w_i**2)

    def __call__(self, nu_s, nu_i):
        nu_s = np.asarray(nu_s, dtype=float)
        nu_i = np.asarray(nu_i, dtype=float)
        if self.model == "angle_model":
            th = math.radians(self.theta)
            u = nu_s * math.cos(th) + nu_i * math.sin(th)
            half = self.fwhm / 2
            if self.profile == "sinc":
                return np.sinc(_SINC_HALF * u / half / np.pi)
            return np.exp(-math.log(2.0) * (u / half) ** 2)
        arg = self.delta_k(nu_s, nu_i) * self.length / 2
        if self.profile == "sinc":
            mag = np.sinc(arg / np.pi)
        else:
            # same FWHM as the sinc
            mag = np.exp(-math.log(2.0) * (arg / _SINC_HALF) ** 2)
        return mag * np.exp(1j * arg)


@dataclass(frozen=True)
class FilterSpec:
    """Spectral filter with amplitude transfer function of peak ``peak``.

    ``center`` is a detuning in GHz, or a wavelength when ``center_unit="nm"``
    (converted against the centre wavelength of the axis it is applied to).
    ``shape="flat"`` is an all-pass of constant ``peak``; ``fwhm`` is ignored.
    """

    fwhm: float = 20.0
    shape: str = "gaussian"
    center: float = 0.0
    center_unit: str = "GHz"
    order: int = 3
    peak: float = 1.0

    def __post_init__(self):
        _check_shape("filter shape", self.shape, {"gaussian", "lorentzian", "supergaussian", "flat"})
        _check_shape("filter centre unit", self.center_unit, {"GHz", "nm"})
        if not 0 < self.peak <= 1:
            raise InvalidParameterError(f"filter peak must lie in (0, 1], got {self.peak}")
        if self.shape != "flat" and not self.fwhm > 0:
            raise InvalidParameterError(f"filter fwhm must be positive, got {self.fwhm}")
        if self.shape == "supergaussian" and self.order < 2:
            raise InvalidParameterError("supergaussian order must be >= 2")

    def center_detuning(self, axis_center_nm):
        if self.center_unit == "GHz":
            return float(self.center)
        return float(wavelength_to_frequency(self.center) - wavelength_to_frequency(axis_center_nm))

    def transmission(self, detunings, axis_center_nm=None):
        """Amplitude transmission at ``detunings`` (GHz) on an axis centred at ``axis_center_nm``."""
        if self.center_unit == "nm" and axis_center_nm is None:
            raise InvalidParameterError("a wavelength-centred filter needs the axis centre wavelength")
        nu = np.asarray(detunings, dtype=float)
        if self.shape == "flat":
            return np.full(nu.shape, self.peak)
        x = (nu - self.center_detuning(axis_center_nm)) / (self.fwhm / 2)
        if self.shape == "gaussian":
            t = np.exp(-math.log(2.0) * x**2)
        elif self.shape == "lorentzian":
            t = 1.0 / (1.0 + x**2)
        else:
            t = np.exp(-math.log(2.0) * np.abs(x) ** (2 * self.order))
        return self.peak * t


def combined_transmission(filters, detunings, axis_center_nm=None):
    """Product of the transmissions of ``filters`` (None, one spec or a sequence)."""
    t = np.ones(np.shape(detunings))
    for f in _as_filter_list(filters):
        t = t * f.transmission(detunings, axis_center_nm)
    return t


def _as_filter_list(filters) -> list:
    if filters is None:
        return []
    if isinstance(filters, FilterSpec):
        return [filters]
    return list(filters)


@dataclass(frozen=True, eq=False)
class JointSpectralAmplitude:
    """Complex JSA indexed ``values[signal_bin, idler_bin]`` on ``grid``."""

    grid: FrequencyGrid
    values: np.ndarray
    provenance: str = "model"
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        vals = np.array(self.values, dtype=complex)
        if vals.shape != self.grid.shape:
            raise GridMismatchError(f"values shape {vals.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(vals)):
            raise InvalidParameterError("JSA contains non-finite entries")
        _check_shape("provenance", self.provenance, {"model", "data"})
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def norm(self):
        """L2 norm including the cell area."""
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2) * self.grid.cell_area))

    @property
    def intensity(self):
        return np.abs(self.values) ** 2

    def normalize(self) -> "JointSpectralAmplitude":
        n = self.norm
        if n == 0:
            raise DegenerateInputError("cannot normalize an all-zero JSA")
        if abs(n - 1.0) < 1e-14:
            return self  # already unit norm; keeps normalize() exactly idempotent
        return replace(self, values=self.values / n)

    def weighted(self):
        """Matrix scaled by sqrt(cell area); its Frobenius norm equals ``norm``."""
        return self.values * math.sqrt(self.grid.cell_area)

    def to_csv(self, path=None):
        """Long-format CSV (nu_s_GHz, nu_i_GHz, re, im); returns the text if ``path`` is None."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["nu_s_GHz", "nu_i_GHz", "re", "im"])
        ns, ni = self.grid.mesh()
        for a, b, v in zip(ns.ravel(), ni.ravel(), self.values.ravel()):
            w.writerow([f"{a:.12g}", f"{b:.12g}", f"{v.real:.12g}", f"{v.imag:.12g}"])
        text = buf.getvalue()
        if path is None:
            return text
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        return None


def energy_mismatch(pump: PumpEnvelope, grid: FrequencyGrid):
    """Pump frequency minus the sum of the two channel centre frequencies, GHz."""
    nu_p = float(wavelength_to_frequency(pump.center_wavelength))
    return nu_p - grid.signal_frequency - grid.idler_frequency


def build_pef(pump: PumpEnvelope, grid: FrequencyGrid) -> np.ndarray:
    """Pump envelope sampled on ``grid``; peak 1 on the line ``nu_s + nu_i = offset``."""
    mismatch = energy_mismatch(pump, grid)
    if abs(mismatch) > 100.0:
        logger.warning("pump centre is %.1f GHz away from energy conservation with the grid channels", mismatch)
    ns, ni = grid.mesh()
    return pump(ns + ni)


def build_pmf(pm: PhaseMatching, grid: FrequencyGrid) -> np.ndarray:
    """Complex phase-matching function sampled on ``grid``, peak magnitude 1."""
    ns, ni = grid.mesh()
    return np.asarray(pm(ns, ni), dtype=complex)


def build_jsa(pef, pmf, grid: FrequencyGrid) -> JointSpectralAmplitude:
    pef = np.asarray(pef)
    pmf = np.asarray(pmf)
    if pef.shape != grid.shape or pmf.shape != grid.shape:
        raise GridMismatchError(f"PEF {pef.shape} / PMF {pmf.shape} do not match grid {grid.shape}")
    product = pef * pmf
    if not np.any(product):
        raise DegenerateInputError("PEF x PMF vanishes everywhere on the grid")
    return JointSpectralAmplitude(grid, product, provenance="model").normalize()


def apply_filters(jsa: JointSpectralAmplitude, signal_filter=None, idler_filter=None):
    """Multiply the JSA by per-arm filter transmissions (not renormalized).

    Each filter argument may be None, a :class:`FilterSpec` or a sequence of
    them (cascaded). Returns ``(filtered_jsa, T)`` with ``T`` the power
    transmission ``|S'|^2 / |S|^2``.
    """
    g = jsa.grid
    for f, center, axis in ((signal_filter, g.signal_center, g.signal_detunings),
                            (idler_filter, g.idler_center, g.idler_detunings)):
        for spec in _as_filter_list(f):
            if spec.shape == "flat":
                continue
            c = spec.center_detuning(center)
            if c + spec.fwhm < axis[0] or c - spec.fwhm > axis[-1]:
                logger.warning("filter centred at %.3f GHz lies outside the grid span", c)
    ts = combined_transmission(signal_filter, g.signal_detunings, g.signal_center)
    ti = combined_transmission(idler_filter, g.idler_detunings, g.idler_center)
    out = replace(jsa, values=jsa.values * ts[:, None] * ti[None, :])
    before = jsa.norm
    if before == 0:
        raise DegenerateInputError("cannot filter an all-zero JSA")
    return out, (out.norm / before) ** 2


def default_grid(pump: PumpEnvelope, pm: PhaseMatching | None = None, filters: Iterable = (),
                 signal_center=1555.1, idler_center=1547.1, points=256) -> FrequencyGrid:
    """Grid spanning +-3x the largest of pump FWHM, PMF FWHM and twice any filter FWHM."""
    widths = [pump.fwhm_ghz]
    if pm is not None and pm.model == "angle_model":
        widths.append(pm.fwhm)
    widths += [2 * f.fwhm for f in _as_filter_list(list(filters)) if f.shape != "flat"]
    span = 3 * max(widths)
    return FrequencyGrid.uniform(signal_center, idler_center, span, points)


def source_amplitude(pump: PumpEnvelope, pm: PhaseMatching, nu_s, nu_i):
    """Unfiltered, unnormalized pair amplitude ``alpha * phi`` at arbitrary detunings."""
    nu_s = np.asarray(nu_s, dtype=float)
    nu_i = np.asarray(nu_i, dtype=float)
    return pump(nu_s + nu_i) * pm(nu_s, nu_i)


def model_jsa(pump: PumpEnvelope, pm: PhaseMatching, grid: FrequencyGrid,
              signal_filter=None, idler_filter=None, normalize=True) -> JointSpectralAmplitude:
    """Convenience: build_pef -> build_pmf -> build_jsa -> apply_filters."""
    jsa = build_jsa(build_pef(pump, grid), build_pmf(pm, grid), grid)
    if signal_filter is not None or idler_filter is not None:
        jsa, _ = apply_filters(jsa, signal_filter, idler_filter)
        if normalize:
            jsa = jsa.normalize()
    return jsa


def filters_from(items: Sequence | None):
    return tuple(_as_filter_list(items))
