"""Hong-Ou-Mandel dip between a heralded SPDC photon and a weak coherent pulse.

Coincidences are counted per herald and expanded to second order in the
pair number ``p`` and the WCP mean photon number ``mu``:

    C(tau) = 1/2 a mu (1 - m M(tau))        heralded photon + one WCP photon
           + 1/4 mu^2                       two WCP photons
           + 1/2 p (1 + P) a^2              second SPDC pair
           + dark

with ``a = eta * h`` the probability that the heralded photon reaches and
fires the interferometer detectors (``h`` spectral heralding efficiency,
``eta`` detection-efficiency ratio), ``P`` the heralded purity, ``m`` a
scalar polarization/spatial mode match and ``M(tau) = <psi_c(tau)|rho|psi_c(tau)>``.
"""

from __future__ import annotations

import csv
import io
import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import DegenerateInputError, GridMismatchError, InvalidParameterError
from .schmidt_analysis import reduced_density
from .spectral_model import JointSpectralAmplitude, apply_filters, combined_transmission

# delay (ps) x detuning (GHz) -> cycles
_PS_GHZ = 1e-3


@dataclass(frozen=True, eq=False)
class WcpSource:
    """Weak coherent pulse: a pure spectral mode plus a mean photon number."""

    axis: np.ndarray
    amplitude: np.ndarray
    mu: float = 0.01

    def __post_init__(self):
        if not self.mu > 0:
            raise InvalidParameterError(f"WCP mean photon number must be positive, got {self.mu}")
        axis = np.asarray(self.axis, dtype=float)
        amp = np.asarray(self.amplitude, dtype=complex)
        if axis.shape != amp.shape:
            raise GridMismatchError("WCP amplitude and axis differ in length")
        step = (axis[-1] - axis[0]) / (axis.size - 1)
        n = math.sqrt(np.sum(np.abs(amp) ** 2) * step)
        if n == 0:
            raise DegenerateInputError("WCP spectral amplitude is zero")
        object.__setattr__(self, "axis", axis)
        object.__setattr__(self, "amplitude", amp / n)

    @classmethod
    def from_filters(cls, filters, axis, axis_center_nm=None, mu=0.01):
        """WCP carved by ``filters`` out of a spectrally flat laser."""
        axis = np.asarray(axis, dtype=float)
        return cls(axis, combined_transmission(filters, axis, axis_center_nm), mu)

    @property
    def step(self):
        return (self.axis[-1] - self.axis[0]) / (self.axis.size - 1)

    def discrete(self):
        """Unit vector on the grid, area weight folded in."""
        return self.amplitude * math.sqrt(self.step)

    def transmission(self, filters, axis_center_nm=None):
        """Fraction of the WCP power passing ``filters``."""
        t = combined_transmission(filters, self.axis, axis_center_nm)
        return float(np.sum(np.abs(self.amplitude * t) ** 2) * self.step)

    def filtered(self, filters, axis_center_nm=None):
        """WCP mode after ``filters``; mu scales by the power transmission."""
        t = combined_transmission(filters, self.axis, axis_center_nm)
        tr = self.transmission(filters, axis_center_nm)
        if tr == 0:
            raise DegenerateInputError("filters block the WCP completely")
        return WcpSource(self.axis, self.amplitude * t, self.mu * tr)


@dataclass(frozen=True, eq=False)
class HeraldedState:
    rho: np.ndarray
    axis: np.ndarray
    heralding_probability: float
    arm: str

    @property
    def purity(self):
        return float(np.real(np.trace(self.rho @ self.rho)))


def heralded_state(jsa: JointSpectralAmplitude, idler_filter=None, signal_filter=None,
                   heralding_arm="signal") -> HeraldedState:
    """Spectral state of the photon heralded by a click on ``heralding_arm``.

    The filtered JSA is traced over the heralding arm. ``heralding_probability``
    is the joint power transmission of the filters relative to the input JSA.
    """
    if heralding_arm not in ("signal", "idler"):
        raise InvalidParameterError(f"heralding_arm must be 'signal' or 'idler', got {heralding_arm!r}")
    filtered, t = apply_filters(jsa, signal_filter, idler_filter)
    if filtered.norm == 0:
        raise DegenerateInputError("filtered JSA vanishes; nothing is heralded")
    arm = "idler" if heralding_arm == "signal" else "signal"
    rho = reduced_density(filtered.normalize(), arm)
    axis = jsa.grid.idler_detunings if arm == "idler" else jsa.grid.signal_detunings
    return HeraldedState(rho, axis, float(t), arm)


def _rho_of(state):
    return state.rho if isinstance(state, HeraldedState) else np.asarray(state)


def mode_overlap(rho, wcp: WcpSource, delay):
    """``<psi_c(tau)| rho |psi_c(tau)>`` for delay(s) in ps; psi_c gets the ramp exp(i 2 pi nu tau)."""
    rho = _rho_of(rho)
    c = wcp.discrete()
    if rho.shape != (c.size, c.size):
        raise GridMismatchError(f"rho {rho.shape} does not match WCP axis of length {c.size}")
    tau = np.atleast_1d(np.asarray(delay, dtype=float))
    phase = np.exp(2j * np.pi * _PS_GHZ * np.outer(tau, wcp.axis))
    psi = phase * c[None, :]
    m = np.real(np.sum((psi.conj() @ rho) * psi, axis=1))
    m = np.clip(m, 0.0, 1.0)
    return float(m[0]) if np.ndim(delay) == 0 else m


@dataclass(frozen=True)
class NoiseModel:
    """Accidental-coincidence channels of the second-order model.

    ``efficiency_ratio`` is the detection probability of the heralded photon
    relative to a WCP photon (the single calibrated parameter).
    """

    efficiency_ratio: float = 1.0
    mode_match: float = 1.0
    dark: float = 0.0
    wcp_multiphoton: bool = True
    double_pairs: bool = True

    def __post_init__(self):
        if not self.efficiency_ratio > 0:
            raise InvalidParameterError("efficiency_ratio must be positive")
        if not 0 < self.mode_match <= 1:
            raise InvalidParameterError("mode_match must lie in (0, 1]")
        if self.dark < 0:
            raise InvalidParameterError("dark contribution must be non-negative")


@dataclass(frozen=True, eq=False)
class HomCurve:
    delays: np.ndarray
    coincidence: np.ndarray
    visibility: float
    dip_fwhm: float
    baseline: float
    dip_delay: float = 0.0
    dip_minimum: float = 0.0
    flags: dict = field(default_factory=dict)

    @property
    def reliable(self):
        return not self.flags.get("baseline_not_covered", False)

    def summary(self):
        return {
            "visibility": _round(self.visibility),
            "fwhm_ps": _round(self.dip_fwhm),
            "baseline": _round(self.baseline),
            "dip_delay_ps": _round(self.dip_delay),
            "reliable": self.reliable,
            "flags": dict(sorted(self.flags.items())),
        }

    def to_json(self):
        return json.dumps(self.summary(), indent=2, sort_keys=True)

    def to_csv(self, path=None):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["delay_ps", "coincidence"])
        for t, c in zip(self.delays, self.coincidence):
            w.writerow([f"{t:.12g}", f"{c:.12g}"])
        text = buf.getvalue()
        if path is None:
            return text
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        return None


def _round(x, digits=12):
    return float(f"{float(x):.{digits}g}")


def coincidence_model(rho, wcp: WcpSource, heralding_prob, pair_rate, noise_model=None, purity=None):
    """Return ``C(tau)`` as a vectorized callable of the delay in ps."""
    rho = _rho_of(rho)
    if noise_model is None:
        return lambda tau: 0.5 * (1.0 - mode_overlap(rho, wcp, tau))
    _check_ranges(pair_rate, wcp.mu, heralding_prob)
    nm = noise_model
    if purity is None:
        purity = float(np.real(np.trace(rho @ rho)))
    a = nm.efficiency_ratio * heralding_prob
    mu = wcp.mu
    accidental = nm.dark
    if nm.wcp_multiphoton:
        accidental += 0.25 * mu * mu
    if nm.double_pairs:
        accidental += 0.5 * pair_rate * (1.0 + purity) * a * a

    def c(tau):
        return 0.5 * a * mu * (1.0 - nm.mode_match * mode_overlap(rho, wcp, tau)) + accidental

    return c


def _check_ranges(p, mu, h):
    if not 0 < p <= 0.1:
        raise InvalidParameterError(f"pair rate p must lie in (0, 0.1], got {p}")
    if not 0 < mu <= 1:
        raise InvalidParameterError(f"WCP mu must lie in (0, 1], got {mu}")
    if not 0 < h <= 1:
        raise InvalidParameterError(f"heralding probability must lie in (0, 1], got {h}")


def ideal_visibility(rho, wcp: WcpSource, noise_model=None):
    """Noise-free visibility m * M(0)."""
    m = 1.0 if noise_model is None else noise_model.mode_match
    return m * mode_overlap(rho, wcp, 0.0)


def hom_curve(rho, heralding_prob, wcp: WcpSource, pair_rate, delays, noise_model=None, purity=None) -> HomCurve:
    """Coincidences vs delay and the extracted visibility / dip FWHM."""
    delays = np.asarray(delays, dtype=float)
    if delays.ndim != 1 or delays.size < 3:
        raise InvalidParameterError("need at least three delays")
    if np.any(np.diff(delays) <= 0):
        raise InvalidParameterError("delays must be strictly increasing")
    model = coincidence_model(rho, wcp, heralding_prob, pair_rate, noise_model, purity)
    coinc = np.asarray(model(delays), dtype=float)
    return extract_dip(delays, coinc, model)


def extract_dip(delays, coincidence, model=None) -> HomCurve:
    """Visibility and FWHM of a dip sampled at ``delays``.

    Baseline: mean coincidence over ``|tau - tau_dip| > 5 * FWHM``. The dip
    minimum is refined by golden-section search on ``model`` when given, else
    taken from the samples. FWHM uses linear interpolation between samples.
    """
    delays = np.asarray(delays, dtype=float)
    coinc = np.asarray(coincidence, dtype=float)
    flags = {}
    k = int(np.argmin(coinc))
    tau0, c0 = float(delays[k]), float(coinc[k])
    if model is not None and 0 < k < delays.size - 1:
        f = lambda t: float(model(t))  # noqa: E731
        try:
            res = minimize_scalar(f, bracket=(delays[k - 1], delays[k], delays[k + 1]), method="golden", tol=1e-10)
        except ValueError:
            # tie with a neighbouring sample: no strict bracket, search the interval instead
            res = minimize_scalar(f, bounds=(delays[k - 1], delays[k + 1]), method="bounded",
                                  options={"xatol": 1e-9})
        if res.fun <= c0:
            tau0, c0 = float(res.x), float(res.fun)

    # first pass: outer tenth of the scan on each side
    n_edge = max(1, delays.size // 10)
    baseline = float(np.mean(np.concatenate([coinc[:n_edge], coinc[-n_edge:]])))
    fwhm = _fwhm(delays, coinc, tau0, c0, baseline)
    if fwhm is not None and np.isfinite(fwhm) and fwhm > 0:
        far = np.abs(delays - tau0) > 5 * fwhm
        if np.any(far):
            baseline = float(np.mean(coinc[far]))
            fwhm = _fwhm(delays, coinc, tau0, c0, baseline)
        else:
            flags["baseline_not_covered"] = True
    else:
        flags["baseline_not_covered"] = True
        fwhm = float("nan") if fwhm is None else fwhm
    if baseline <= 0:
        raise DegenerateInputError("baseline coincidence rate is zero")
    vis = float(np.clip((baseline - c0) / baseline, 0.0, 1.0))
    if flags:
        warnings.warn("HOM delay scan does not reach the baseline; visibility is unreliable", stacklevel=2)
    return HomCurve(delays, coinc, vis, float(fwhm), baseline, tau0, c0, flags)


def _fwhm(delays, coinc, tau0, c0, baseline):
    half = 0.5 * (baseline + c0)
    if baseline - c0 <= 0:
        return None
    k = int(np.argmin(np.abs(delays - tau0)))
    j = k
    while j > 0 and coinc[j] < half:
        j -= 1
    if coinc[j] < half:
        return None
    left = _cross(delays[j], coinc[j], delays[j + 1], coinc[j + 1], half) if j < k else delays[j]
    j = k
    while j < delays.size - 1 and coinc[j] < half:
        j += 1
    if coinc[j] < half:
        return None
    right = _cross(delays[j - 1], coinc[j - 1], delays[j], coinc[j], half) if j > k else delays[j]
    return right - left


def _cross(x0, y0, x1, y1, level):
    if y1 == y0:
        return 0.5 * (x0 + x1)
    return x0 + (level - y0) * (x1 - x0) / (y1 - y0)


def gaussian_overlap(fwhm_ghz, delay_ps):
    """Closed-form ``|<psi|psi(tau)>|^2`` for a Gaussian amplitude of FWHM ``fwhm_ghz``.

    With amplitude ``exp(-ln2 (2 nu/B)^2)`` the power spectrum has standard
    deviation ``s = B / (4 sqrt(ln 2))`` and the overlap is ``exp(-(2 pi s tau)^2)``.
    """
    s = fwhm_ghz / (4.0 * math.sqrt(math.log(2.0)))
    return np.exp(-((2 * np.pi * s * _PS_GHZ * np.asarray(delay_ps, dtype=float)) ** 2))
