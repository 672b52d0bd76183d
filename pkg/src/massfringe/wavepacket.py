"""Initial states and free propagation of non-relativistic wavepackets.

The 3D problem is factorized: the x and z axes carry 1D grids, the y
axis is handled analytically through the carrier wavenumber k0 and the
rigid-crossing approximation.  Propagation is spectral: multiply the
momentum amplitude by exp(-i k^2 t / 2m), which is exactly unitary on
the grid.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import RegimeError
from .grids import (GridSpec, WavefunctionGrid, MOMENTUM, POSITION,
                    ensure_band_limited, from_function, to_momentum, to_position)

#: non-relativistic guard: require k0/m < NONREL_LIMIT for every mass in play
NONREL_LIMIT = 0.1

#: paraxial guard: packet size over propagation distance
PARAXIAL_LIMIT = 0.1

DOUBLE_SLIT = "double-slit"
GAUSSIAN = "gaussian"
CUSTOM = "custom-grid"


@dataclass(frozen=True)
class Species:
    """One rest-mass component of the composite particle."""

    mass: float
    weight: float = 1.0

    def __post_init__(self):
        if self.mass <= 0:
            raise ValueError(f"species mass must be positive, got {self.mass}")
        if not 0.0 <= self.weight <= 1.0:
            raise ValueError(f"species weight must be in [0, 1], got {self.weight}")

    def velocity(self, k0: float) -> float:
        return k0 / self.mass


def arrival_time(mass: float, k0: float, distance: float) -> float:
    """Coordinate time for the packet center to reach the screen plane:
    t_m = m * L / k0."""
    if mass <= 0 or k0 <= 0 or distance <= 0:
        raise ValueError("arrival_time requires positive mass, k0 and distance")
    return mass * distance / k0


@dataclass(frozen=True)
class InitialState:
    """Separable initial state: gridded z profile, analytic x/y envelopes,
    carrier k0 along y."""

    kind: str
    k0: float
    z1: float = 0.0
    z2: float = 0.0
    slit_width: float = 0.0
    center: float = 0.0
    width: float = 1.0
    y_width: float = 1.0
    x_width: float = 1.0
    custom: Optional[WavefunctionGrid] = None

    def __post_init__(self):
        if self.k0 <= 0:
            raise ValueError("carrier wavenumber k0 must be positive")
        if self.y_width <= 0 or self.x_width <= 0:
            raise ValueError("x/y envelope widths must be positive")
        if self.kind == DOUBLE_SLIT:
            sep = abs(self.z1 - self.z2)
            if self.slit_width <= 0:
                raise ValueError("slit width must be positive")
            if sep == 0 or self.slit_width > 0.2 * sep:
                raise ValueError(
                    "slit width must be small against the slit separation")
        elif self.kind == GAUSSIAN:
            if self.width <= 0:
                raise ValueError("gaussian width must be positive")
        elif self.kind == CUSTOM:
            if self.custom is None:
                raise ValueError("custom-grid state requires a grid")
        else:
            raise ValueError(f"unknown initial state kind {self.kind!r}")

    @classmethod
    def double_slit(cls, z1: float, z2: float, slit_width: float, k0: float,
                    y_width: float = 1.0, x_width: float = 1.0) -> "InitialState":
        return cls(DOUBLE_SLIT, k0, z1=z1, z2=z2, slit_width=slit_width,
                   y_width=y_width, x_width=x_width)

    @classmethod
    def gaussian(cls, center: float, width: float, k0: float,
                 y_width: float = 1.0, x_width: float = 1.0) -> "InitialState":
        return cls(GAUSSIAN, k0, center=center, width=width,
                   y_width=y_width, x_width=x_width)

    @classmethod
    def custom_grid(cls, grid: WavefunctionGrid, k0: float,
                    y_width: float = 1.0, x_width: float = 1.0) -> "InitialState":
        return cls(CUSTOM, k0, custom=grid, y_width=y_width, x_width=x_width)

    def check_mass(self, mass: float) -> None:
        if self.k0 / mass >= NONREL_LIMIT:
            raise RegimeError(
                f"non-relativistic regime violated: k0/m = {self.k0 / mass:.3g} "
                f">= {NONREL_LIMIT}")

    def packet_half_length(self) -> float:
        """Rough half-extent of the z profile, for the paraxial guard."""
        if self.kind == DOUBLE_SLIT:
            return max(abs(self.z1), abs(self.z2)) + 5 * self.slit_width
        if self.kind == GAUSSIAN:
            return abs(self.center) + 5 * self.width
        c = self.custom.coords()
        d = self.custom.density()
        live = np.abs(c[d > 1e-12 * d.max()])
        return float(live.max()) if live.size else 0.0

    def z_envelope(self, spec: GridSpec) -> WavefunctionGrid:
        """Normalized initial z profile on the given grid."""
        if self.kind == DOUBLE_SLIT:
            eps = self.slit_width

            def fn(z):
                return (np.exp(-((z - self.z1) ** 2) / (2 * eps ** 2))
                        + np.exp(-((z - self.z2) ** 2) / (2 * eps ** 2)))
        elif self.kind == GAUSSIAN:
            def fn(z):
                return np.exp(-((z - self.center) ** 2) / (2 * self.width ** 2))
        else:
            return self.custom.normalized()
        return from_function("z", spec, fn)

    def y_density(self, y) -> np.ndarray:
        """Normalized rigid y-envelope density (Gaussian, std ``y_width``)."""
        w = self.y_width
        return np.exp(-np.asarray(y, dtype=float) ** 2 / (2 * w ** 2)) / (
            np.sqrt(2 * np.pi) * w)

    def x_intensity(self, x) -> np.ndarray:
        w = self.x_width
        return np.exp(-np.asarray(x, dtype=float) ** 2 / (2 * w ** 2)) / (
            np.sqrt(2 * np.pi) * w)


def kspace_evolve(f: WavefunctionGrid, mass: float, t: float,
                  center: float = 0.0) -> WavefunctionGrid:
    """Free evolution of a momentum amplitude: psi(t, z) obtained by
    multiplying by exp(-i k^2 t / 2m) and transforming to position space."""
    if t < 0:
        raise ValueError("invalid time: t must be >= 0")
    if mass <= 0:
        raise ValueError("mass must be positive")
    if f.space != MOMENTUM:
        raise ValueError("kspace_evolve expects a momentum-space amplitude")
    ensure_band_limited(f)
    k = f.coords()
    evolved = WavefunctionGrid(f.axis, f.spec,
                               f.values * np.exp(-0.5j * k ** 2 * t / mass),
                               MOMENTUM, f.carrier)
    return to_position(evolved, center=center)


def fresnel_propagate(psi: WavefunctionGrid, mass: float, t: float) -> WavefunctionGrid:
    """Free-propagator kernel sqrt(m/2 pi i t) * exp(-m (x-x')^2 / 2 i t),
    applied spectrally.  Returns the packet on the same position grid."""
    if t < 0:
        raise ValueError("invalid time: t must be >= 0")
    if mass <= 0:
        raise ValueError("mass must be positive")
    if psi.space != POSITION:
        raise ValueError("fresnel_propagate expects a position-space packet")
    if t == 0:
        return psi
    f = to_momentum(psi)
    return kspace_evolve(f, mass, t, center=psi.spec.center)


def final_packet(ini: InitialState, distance: float, spec: GridSpec) -> WavefunctionGrid:
    """Mass-independent arrival packet: Fresnel diffraction of the initial
    z profile with kernel wavenumber k0 over the screen distance."""
    if distance <= 0:
        raise ValueError("distance must be positive")
    if ini.packet_half_length() / distance > PARAXIAL_LIMIT:
        raise RegimeError("paraxial assumption violated: packet size is not "
                          "small against the propagation distance")
    psi0 = ini.z_envelope(spec)
    return fresnel_propagate(psi0, ini.k0, distance)
