"""Measured joint-spectral-intensity grids: parsing, cleaning, amplitude.

Input is a long-format CSV with header ``nu_s_GHz,nu_i_GHz,counts``, one
row per (signal, idler) FBG setting. Amplitudes are taken as sqrt(counts)
with a flat phase, so any purity derived from them is phase blind.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DegenerateInputError, InvalidParameterError, JsiFormatError
from .schmidt_analysis import SchmidtResult, schmidt_decompose
from .spectral_model import FrequencyGrid, JointSpectralAmplitude

HEADER = ("nu_s_GHz", "nu_i_GHz", "counts")
MAX_GAPS_REPORTED = 20


@dataclass(frozen=True)
class JsiRecord:
    signal_detuning: float
    idler_detuning: float
    counts: int


@dataclass(frozen=True, eq=False)
class JsiGrid:
    """Complete coincidence matrix ``counts[signal, idler]`` on uniform detuning axes (GHz)."""

    signal_detunings: np.ndarray
    idler_detunings: np.ndarray
    counts: np.ndarray  # float so that background-subtracted grids fit
    signal_center: float = 1555.1
    idler_center: float = 1547.1
    background_estimate: float = 0.0
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        s = np.array(self.signal_detunings, dtype=float)
        i = np.array(self.idler_detunings, dtype=float)
        c = np.array(self.counts, dtype=float)
        if c.shape != (s.size, i.size):
            raise JsiFormatError(f"counts shape {c.shape} does not match axes ({s.size}, {i.size})")
        if not np.all(np.isfinite(c)):
            raise JsiFormatError("counts must be finite")
        if np.any(c < 0):
            raise JsiFormatError("counts must be non-negative")
        for a in (s, i, c):
            a.setflags(write=False)
        object.__setattr__(self, "signal_detunings", s)
        object.__setattr__(self, "idler_detunings", i)
        object.__setattr__(self, "counts", c)

    @classmethod
    def from_grid(cls, grid: FrequencyGrid, counts, **kw) -> "JsiGrid":
        return cls(grid.signal_detunings, grid.idler_detunings, counts, grid.signal_center,
                   grid.idler_center, **kw)

    @property
    def shape(self):
        return self.counts.shape

    @property
    def grid(self) -> FrequencyGrid:
        """The spectral grid; needs at least 8 points per axis."""
        try:
            return FrequencyGrid(self.signal_center, self.idler_center, self.signal_detunings,
                                 self.idler_detunings)
        except InvalidParameterError as exc:
            raise JsiFormatError(f"grid {self.shape[0]}x{self.shape[1]} is unusable for spectral analysis: "
                                 f"{exc}") from None

    def _mesh(self):
        return np.meshgrid(self.signal_detunings, self.idler_detunings, indexing="ij")

    @property
    def total_counts(self):
        return float(self.counts.sum())

    def records(self):
        ns, ni = self._mesh()
        return [JsiRecord(float(a), float(b), c) for a, b, c in zip(ns.ravel(), ni.ravel(), self.counts.ravel())]

    def to_csv(self, path=None):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(HEADER)
        ns, ni = self._mesh()
        for a, b, c in zip(ns.ravel(), ni.ravel(), self.counts.ravel()):
            cs = str(int(c)) if float(c).is_integer() else f"{c:.12g}"
            w.writerow([f"{a:.12g}", f"{b:.12g}", cs])
        text = buf.getvalue()
        if path is None:
            return text
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        return None


def _read_text(source):
    if isinstance(source, (str, os.PathLike)) and not (isinstance(source, str) and "\n" in source):
        if isinstance(source, os.PathLike) or os.path.exists(source):
            with open(source, encoding="utf-8") as fh:
                return fh.read()
    if hasattr(source, "read"):
        return source.read()
    return str(source)


def _axis(values, name):
    """Sorted unique axis values, checked for uniform spacing."""
    ax = np.array(sorted(set(values)), dtype=float)
    if ax.size < 2:
        raise JsiFormatError(f"{name} axis has fewer than two distinct values")
    steps = np.diff(ax)
    step = (ax[-1] - ax[0]) / (ax.size - 1)
    if np.max(np.abs(steps - step)) > 1e-6 * step:
        bad = int(np.argmax(np.abs(steps - step)))
        raise JsiFormatError(
            f"{name} axis is not uniformly spaced (step {steps[bad]:.6g} between "
            f"{ax[bad]:.6g} and {ax[bad + 1]:.6g}, expected {step:.6g})")
    return ax


def parse_jsi(source, signal_center=1555.1, idler_center=1547.1) -> JsiGrid:
    """Parse a long-format JSI table into a complete, validated grid.

    ``source`` is a path, an open file or the CSV text itself. Every
    (nu_s, nu_i) cell must appear exactly once.
    """
    text = _read_text(source)
    rows = list(csv.reader(io.StringIO(text)))
    rows = [(n, r) for n, r in enumerate(rows, start=1) if any(cell.strip() for cell in r)]
    if not rows:
        raise JsiFormatError("no records: file is empty")
    line, header = rows[0]
    if tuple(h.strip() for h in header) != HEADER:
        raise JsiFormatError(f"header must be {','.join(HEADER)}, got {','.join(header)}", line)
    if len(rows) == 1:
        raise JsiFormatError("no records: header only")

    cells = {}
    for line, row in rows[1:]:
        if len(row) != 3:
            raise JsiFormatError(f"expected 3 columns, got {len(row)}", line)
        try:
            ns, ni = float(row[0]), float(row[1])
            raw = float(row[2])
        except ValueError:
            raise JsiFormatError(f"non-numeric value in {row!r}", line) from None
        if not (math.isfinite(ns) and math.isfinite(ni) and math.isfinite(raw)):
            raise JsiFormatError("non-finite value", line)
        if raw < 0:
            raise JsiFormatError(f"negative counts {raw:g}", line)
        if not raw.is_integer():
            raise JsiFormatError(f"counts must be integers, got {raw:g}", line)
        key = (ns, ni)
        if key in cells:
            raise JsiFormatError(
                f"duplicate cell (nu_s={ns:g}, nu_i={ni:g}) also on row {cells[key][0]}", line)
        cells[key] = (line, int(raw))

    sig = _axis([k[0] for k in cells], "signal")
    idl = _axis([k[1] for k in cells], "idler")
    counts = np.full((sig.size, idl.size), np.nan)
    s_index = {v: j for j, v in enumerate(sig)}
    i_index = {v: j for j, v in enumerate(idl)}
    for (ns, ni), (_, c) in cells.items():
        counts[s_index[ns], i_index[ni]] = c
    missing = np.argwhere(np.isnan(counts))
    if missing.size:
        gaps = ", ".join(f"({sig[a]:g}, {idl[b]:g})" for a, b in missing[:MAX_GAPS_REPORTED])
        more = "" if len(missing) <= MAX_GAPS_REPORTED else f" and {len(missing) - MAX_GAPS_REPORTED} more"
        raise JsiFormatError(f"{len(missing)} missing cells: {gaps}{more}")
    return JsiGrid(sig, idl, counts, signal_center, idler_center)


def border_median(counts):
    """Median of the outermost ring of cells."""
    c = np.asarray(counts, dtype=float)
    ring = np.concatenate([c[0, :], c[-1, :], c[1:-1, 0], c[1:-1, -1]])
    return float(np.median(ring))


def subtract_background(g: JsiGrid, method="border_median") -> JsiGrid:
    """Remove a flat background and clamp at zero.

    ``method`` is ``"border_median"`` or a fixed number of counts per bin.
    """
    if method == "border_median":
        b = border_median(g.counts)
    elif isinstance(method, (int, float)) and not isinstance(method, bool):
        b = float(method)
        if b < 0:
            raise InvalidParameterError("fixed background must be non-negative")
    else:
        raise InvalidParameterError(f"unknown background method {method!r}")
    cleaned = np.maximum(g.counts - b, 0.0)
    meta = dict(g.metadata, background_method=method if isinstance(method, str) else "fixed")
    return replace(g, counts=cleaned, background_estimate=b, metadata=meta)


def jsi_to_amplitude(g: JsiGrid) -> JointSpectralAmplitude:
    """sqrt(counts) with flat phase, normalized; marked phase blind."""
    if not np.any(g.counts > 0):
        raise DegenerateInputError("JSI grid has no counts")
    amp = np.sqrt(g.counts)
    meta = {"phase_blind": True, "assumption": "flat spectral phase", "background": g.background_estimate}
    return JointSpectralAmplitude(g.grid, amp, provenance="data", metadata=meta).normalize()


def synthesize_jsi(jsa: JointSpectralAmplitude, total_counts, rng=None, background=0.0,
                   noise=True) -> JsiGrid:
    """Counts grid drawn from ``|jsa|^2`` scaled to ``total_counts`` plus a flat background.

    ``rng`` is a :class:`numpy.random.Generator` or a seed. With
    ``noise=False`` the expected counts are rounded instead of sampled.
    """
    rng = np.random.default_rng(rng)
    inten = jsa.intensity
    expected = total_counts * inten / inten.sum() + background
    counts = rng.poisson(expected) if noise else np.rint(expected)
    return JsiGrid.from_grid(jsa.grid, counts.astype(float))


def analyze(g: JsiGrid, background="border_median", rank_cutoff=None) -> SchmidtResult:
    """Full pipeline: background subtraction, sqrt amplitude, Schmidt decomposition."""
    cleaned = subtract_background(g, background) if background is not None else g
    jsa = jsi_to_amplitude(cleaned)
    return schmidt_decompose(jsa) if rank_cutoff is None else schmidt_decompose(jsa, rank_cutoff)


def analysis_report(result: SchmidtResult, g: JsiGrid | None = None, max_lambdas=10) -> dict:
    report = result.to_dict(max_lambdas)
    if g is not None:
        report["total_counts"] = float(f"{g.total_counts:.12g}")
        report["background_per_bin"] = float(f"{g.background_estimate:.12g}")
        report["grid_shape"] = list(g.shape)
    return report


def report_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True)
