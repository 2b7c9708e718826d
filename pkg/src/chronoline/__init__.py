"""
chronoline
==========

Timeline (system-time) representations of quantum states: special functions,
oscillatory quadrature, revival analysis, closed-form timeline waves for free
fall and the free particle, and coordinate-space time operators.
"""

from . import checks, oscquad, specfun, spectra, systems, timeline, timeop
from .errors import (
    AccuracyError,
    ChronolineError,
    ConvergenceWarning,
    IrrationalSpectrumError,
    RangeError,
    SingularTimeError,
    SpectrumMismatchError,
    UnsupportedStateError,
)
from .spectra import (
    ContinuumBand,
    DiscreteSpectrum,
    PhysicalParams,
    RevivalData,
    SpectralState,
    hydrogen_spectrum,
    oscillator_spectrum,
    revival_time,
    square_well_spectrum,
)
from .systems import (
    WaveKind,
    free1d_directional_wave,
    free1d_parity_wave,
    free3d_radial_wave,
    free3d_universal_wave,
    freefall_wave,
)
from .timeline import timeline_transform

__all__ = [
    "checks",
    "oscquad",
    "specfun",
    "spectra",
    "systems",
    "timeline",
    "timeop",
    "AccuracyError",
    "ChronolineError",
    "ConvergenceWarning",
    "IrrationalSpectrumError",
    "RangeError",
    "SingularTimeError",
    "SpectrumMismatchError",
    "UnsupportedStateError",
    "ContinuumBand",
    "DiscreteSpectrum",
    "PhysicalParams",
    "RevivalData",
    "SpectralState",
    "hydrogen_spectrum",
    "oscillator_spectrum",
    "revival_time",
    "square_well_spectrum",
    "WaveKind",
    "free1d_directional_wave",
    "free1d_parity_wave",
    "free3d_radial_wave",
    "free3d_universal_wave",
    "freefall_wave",
    "timeline_transform",
]

__version__ = "0.1.0"
