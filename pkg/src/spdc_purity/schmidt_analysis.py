"""Schmidt decomposition of a joint spectral amplitude.

The JSA is weighted by sqrt(cell area) so that the discrete matrix has unit
Frobenius norm; its singular values are the Schmidt amplitudes sqrt(lambda_n).
Data-derived JSAs are already square roots of intensities, so singular values
are squared exactly once here and nowhere else.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateInputError, InvalidParameterError
from .spectral_model import JointSpectralAmplitude

DEFAULT_RANK_CUTOFF = 1e-7


@dataclass(frozen=True, eq=False)
class SchmidtResult:
    lambdas: np.ndarray
    signal_modes: np.ndarray  # shape (rank, n_signal), orthonormal under sum(conj(a)*b)*d_signal
    idler_modes: np.ndarray  # shape (rank, n_idler)
    rank_kept: int
    signal_axis: np.ndarray
    idler_axis: np.ndarray
    flags: dict = field(default_factory=dict)

    @property
    def purity(self) -> float:
        return float(np.sum(self.lambdas**2))

    @property
    def schmidt_number(self) -> float:
        return 1.0 / self.purity

    def reconstruct(self):
        """Rebuild the (normalized) JSA values from the kept modes."""
        amps = np.sqrt(self.lambdas)
        return np.einsum("n,ns,ni->si", amps, self.signal_modes, self.idler_modes)

    def to_dict(self, max_lambdas=None):
        lam = self.lambdas if max_lambdas is None else self.lambdas[:max_lambdas]
        return {
            "purity": _round(self.purity),
            "schmidt_number": _round(self.schmidt_number),
            "rank_kept": int(self.rank_kept),
            "lambdas": [_round(x) for x in lam],
            "flags": dict(sorted(self.flags.items())),
        }

    def to_json(self, max_lambdas=None):
        return json.dumps(self.to_dict(max_lambdas), indent=2, sort_keys=True)

    def modes_to_csv(self, n_modes=None, path=None):
        """Mode profiles in long format: arm, mode, nu_GHz, re, im."""
        n = self.rank_kept if n_modes is None else min(n_modes, self.rank_kept)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["arm", "mode", "nu_GHz", "re", "im"])
        for arm, axis, modes in (("signal", self.signal_axis, self.signal_modes),
                                 ("idler", self.idler_axis, self.idler_modes)):
            for k in range(n):
                for nu, v in zip(axis, modes[k]):
                    w.writerow([arm, k, f"{nu:.12g}", f"{v.real:.12g}", f"{v.imag:.12g}"])
        text = buf.getvalue()
        if path is None:
            return text
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        return None


def _round(x, digits=12):
    return float(f"{float(x):.{digits}g}")


def _checked(jsa: JointSpectralAmplitude) -> JointSpectralAmplitude:
    if not np.all(np.isfinite(jsa.values)):
        raise InvalidParameterError("JSA contains non-finite entries")
    n = jsa.norm
    if n == 0:
        raise DegenerateInputError("JSA is identically zero")
    if abs(n * n - 1.0) > 1e-9:
        jsa = jsa.normalize()
    return jsa


def schmidt_decompose(jsa: JointSpectralAmplitude, rank_cutoff=DEFAULT_RANK_CUTOFF) -> SchmidtResult:
    """Singular value decomposition of the area-weighted JSA.

    Singular values below ``rank_cutoff * sigma_0`` are dropped and the kept
    lambdas renormalized to sum to one.
    """
    if rank_cutoff < 0:
        raise InvalidParameterError("rank_cutoff must be non-negative")
    jsa = _checked(jsa)
    g = jsa.grid
    u, sv, vh = np.linalg.svd(jsa.weighted(), full_matrices=False)
    keep = sv > rank_cutoff * sv[0] if rank_cutoff > 0 else sv > 0
    rank = int(np.count_nonzero(keep))
    lam = sv[:rank] ** 2
    lam = lam / lam.sum()
    signal_modes = u[:, :rank].T / math.sqrt(g.d_signal)
    idler_modes = vh[:rank, :] / math.sqrt(g.d_idler)
    flags = {}
    if jsa.provenance == "data" or jsa.metadata.get("phase_blind"):
        flags["phase_blind"] = True
    return SchmidtResult(lam, signal_modes, idler_modes, rank, g.signal_detunings,
                         g.idler_detunings, flags)


def purity(jsa: JointSpectralAmplitude) -> float:
    """Heralded-photon purity, sum of lambda_n^2 with no rank truncation."""
    return schmidt_decompose(jsa, rank_cutoff=0.0).purity


def reduced_density(jsa: JointSpectralAmplitude, which="signal") -> np.ndarray:
    """Discrete reduced density matrix of one arm (trace 1, Hermitian, PSD).

    Element ``[j, k]`` is the coherence between bins j and k, area weights
    included, so ``trace(rho) == 1`` for a normalized JSA.
    """
    jsa = _checked(jsa)
    a = jsa.weighted()
    if which == "signal":
        rho = a @ a.conj().T
    elif which == "idler":
        rho = a.T @ a.conj()
    else:
        raise InvalidParameterError(f"which must be 'signal' or 'idler', got {which!r}")
    return 0.5 * (rho + rho.conj().T)
