"""Polarization-resolved emission spectra of a quantum dot in a micropillar cavity."""

from .analysis import (
    DoubletFit,
    PolarizationFit,
    central_dip,
    cui_raymer_splittings,
    find_peaks,
    fit_doublet,
    fit_polarization,
    g2_zero,
    peak_separation,
)
from .config import RunConfig, parse_config, serialize_config
from .detection import (
    ChannelSpectra,
    DetectionParams,
    detected_spectrum,
    detuning_sweep,
    hwp_sweep,
    hwp_to_theta,
    projection_sweep,
)
from .errors import ConfigError, NumericError, VrsError
from .linalg import HilbertSpace, build_operators
from .model import Liouvillian, QedParams, build_hamiltonian, build_liouvillian, effective_g
from .spectra import FrequencyGrid, RawSpectrum, convolve_instrument, correlation_spectrum
from .steadystate import DensityMatrix, solve_steady

__version__ = "0.1.0"
