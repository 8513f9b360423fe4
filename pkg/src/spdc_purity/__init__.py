"""SPDC joint-spectrum purity, HOM visibility and rate trade-off modelling."""

from .errors import (
    ConfigError,
    DegenerateInputError,
    GridMismatchError,
    InvalidParameterError,
    JsiFormatError,
)
from .hom_interference import (
    HeraldedState,
    HomCurve,
    NoiseModel,
    WcpSource,
    heralded_state,
    hom_curve,
    mode_overlap,
)
from .jsi_ingest import JsiGrid, JsiRecord, jsi_to_amplitude, parse_jsi, subtract_background, synthesize_jsi
from .presets import CALIBRATION, PRESET_NAMES, Calibration, Scenario, preset
from .rate_model import RateEstimate, estimate_rates, relative_threefold_rate
from .schmidt_analysis import SchmidtResult, purity, reduced_density, schmidt_decompose
from .spectral_model import (
    FilterSpec,
    FrequencyGrid,
    JointSpectralAmplitude,
    PhaseMatching,
    PumpEnvelope,
    apply_filters,
    build_jsa,
    build_pef,
    build_pmf,
)

__version__ = "0.1.0"
