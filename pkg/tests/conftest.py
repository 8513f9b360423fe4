import numpy as np
import pytest

from spdc_purity.presets import preset
from spdc_purity.spectral_model import FrequencyGrid, JointSpectralAmplitude


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def presets():
    """Built-in scenarios, constructed once per session."""
    return {name: preset(name) for name in ("paper_fig2b", "paper_fig2c", "fig3b", "fig3c", "fig3d")}


@pytest.fixture(scope="session")
def hom_curves(presets):
    return {name: presets[name].hom() for name in ("fig3b", "fig3c", "fig3d")}


def random_jsa(rng, ns, ni, complex_=True):
    grid = FrequencyGrid.uniform(1555.1, 1547.1, span=10.0, points=ns, idler_points=ni)
    vals = rng.normal(size=(ns, ni))
    if complex_:
        vals = vals + 1j * rng.normal(size=(ns, ni))
    return JointSpectralAmplitude(grid, vals).normalize()


def brute_purity(jsa):
    """Tr(rho^2) with rho = S S^dagger built by hand, no SVD."""
    s = jsa.values * np.sqrt(jsa.grid.cell_area)
    rho = s @ s.conj().T
    rho = rho / np.trace(rho).real
    return float(np.real(np.trace(rho @ rho)))
