"""Uniform 1D grids holding complex wavefunction envelopes.

Natural units hbar = c = 1 throughout.  Position and momentum
representations are related by the unitary continuum convention

    f(k) = (2*pi)^(-1/2) \\int psi(z) exp(-i k z) dz

discretized with centered FFTs, so the L2 norm is the same in both
representations.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import AliasingError, GridError

POSITION = "position"
MOMENTUM = "momentum"

#: relative amplitude at the grid edge above which a state is considered
#: aliased
EDGE_TOL = 1e-8


@dataclass(frozen=True)
class GridSpec:
    """Sample count (power of two), full extent and center of a 1D grid."""

    points: int
    extent: float
    center: float = 0.0

    def __post_init__(self):
        if self.points < 2 or (self.points & (self.points - 1)) != 0:
            raise GridError(f"grid points must be a power of two, got {self.points}")
        if self.extent <= 0:
            raise GridError("grid extent must be positive")

    @property
    def spacing(self) -> float:
        return self.extent / self.points

    def coords(self) -> np.ndarray:
        n = self.points
        return self.center + (np.arange(n) - n // 2) * self.spacing


@dataclass(frozen=True)
class WavefunctionGrid:
    """Complex amplitude samples on a uniform grid along one axis.

    ``carrier`` stores an optional carrier wavenumber along the axis,
    kept separate from the sampled envelope.
    """

    axis: str
    spec: GridSpec
    values: np.ndarray
    space: str = POSITION
    carrier: float = 0.0

    def __post_init__(self):
        if self.axis not in ("x", "y", "z"):
            raise GridError(f"axis must be one of x, y, z, got {self.axis!r}")
        if self.values.shape != (self.spec.points,):
            raise GridError("value array does not match grid spec")

    def coords(self) -> np.ndarray:
        return self.spec.coords()

    @property
    def spacing(self) -> float:
        return self.spec.spacing

    def norm_squared(self) -> float:
        """L2 norm integral |psi|^2 over the grid."""
        return float(np.sum(np.abs(self.values) ** 2) * self.spacing)

    def normalized(self) -> "WavefunctionGrid":
        n2 = self.norm_squared()
        if n2 <= 0:
            raise GridError("cannot normalize a null state")
        return replace(self, values=self.values / np.sqrt(n2))

    def density(self) -> np.ndarray:
        return np.abs(self.values) ** 2

    def centroid(self) -> float:
        d = self.density()
        return float(np.sum(self.coords() * d) / np.sum(d))

    def width(self) -> float:
        """RMS width of |psi|^2."""
        d = self.density()
        c = self.coords()
        mean = np.sum(c * d) / np.sum(d)
        return float(np.sqrt(np.sum((c - mean) ** 2 * d) / np.sum(d)))


def from_function(axis: str, spec: GridSpec, fn, carrier: float = 0.0,
                  normalize: bool = True) -> WavefunctionGrid:
    vals = np.asarray(fn(spec.coords()), dtype=complex)
    g = WavefunctionGrid(axis, spec, vals, POSITION, carrier)
    return g.normalized() if normalize else g


def to_momentum(g: WavefunctionGrid) -> WavefunctionGrid:
    """Centered FFT to the momentum representation (monotonic k grid)."""
    if g.space != POSITION:
        raise GridError("to_momentum expects a position-space grid")
    n = g.spec.points
    dx = g.spacing
    k = np.fft.fftshift(2 * np.pi * np.fft.fftfreq(n, dx))
    f = np.fft.fftshift(np.fft.fft(np.fft.ifftshift(g.values))) * dx / np.sqrt(2 * np.pi)
    f = f * np.exp(-1j * k * g.spec.center)
    dk = 2 * np.pi / (n * dx)
    kspec = GridSpec(n, n * dk, 0.0)
    return WavefunctionGrid(g.axis, kspec, f, MOMENTUM, g.carrier)


def to_position(f: WavefunctionGrid, center: float = 0.0) -> WavefunctionGrid:
    """Inverse transform back onto a position grid centered at ``center``."""
    if f.space != MOMENTUM:
        raise GridError("to_position expects a momentum-space grid")
    n = f.spec.points
    dk = f.spacing
    dx = 2 * np.pi / (n * dk)
    k = f.coords()
    vals = np.fft.fftshift(np.fft.ifft(np.fft.ifftshift(f.values * np.exp(1j * k * center))))
    vals = vals * n * dk / np.sqrt(2 * np.pi)
    spec = GridSpec(n, n * dx, center)
    return WavefunctionGrid(f.axis, spec, vals, POSITION, f.carrier)


def ensure_band_limited(f: WavefunctionGrid, tol: float = EDGE_TOL) -> None:
    """Raise AliasingError when the momentum amplitude reaches the grid edge."""
    if f.space != MOMENTUM:
        f = to_momentum(f)
    a = np.abs(f.values)
    peak = a.max()
    if peak == 0:
        return
    edge = max(a[:2].max(), a[-2:].max())
    if edge > tol * peak:
        raise AliasingError(
            f"aliasing: relative edge amplitude {edge / peak:.2e} exceeds {tol:.1e}")
