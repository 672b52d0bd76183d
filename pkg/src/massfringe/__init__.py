"""Matter-wave interferometry of composite particles with internal mass
spectra: wavepacket propagation onto moving detector screens, flux
patterns, and closed-form dephasing/visibility analysis."""

from .grids import GridSpec, WavefunctionGrid
from .labframe import GravityModel, HeisenbergTrajectory
from .measurement import Pattern
from .spectrum import MassSpectrum
from .visibility import FringeModel, VisibilityReport
from .wavepacket import InitialState, Species
from .worldline import ProperFramePoint, ScreenWorldline

__all__ = [
    "FringeModel",
    "GravityModel",
    "GridSpec",
    "HeisenbergTrajectory",
    "InitialState",
    "MassSpectrum",
    "Pattern",
    "ProperFramePoint",
    "ScreenWorldline",
    "Species",
    "VisibilityReport",
    "WavefunctionGrid",
]

__version__ = "0.1.0"
