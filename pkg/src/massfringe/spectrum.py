"""Internal-state mass distributions P_m.

Continuous kinds are discretized by Gauss-Hermite nodes (32 by default)
for phasor and pattern quadrature.  The thermal kind is modeled as a
Gaussian mass distribution with standard deviation k_B T sqrt(N).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .wavepacket import Species

DISCRETE = "discrete"
GAUSSIAN = "gaussian"
THERMAL = "thermal"

#: perturbative-regime guard on the relative mass spread
MAX_RELATIVE_SPREAD = 0.1

_WEIGHT_TOL = 1e-12


@dataclass(frozen=True)
class MassSpectrum:
    kind: str
    masses: Optional[tuple] = None
    weights: Optional[tuple] = None
    mean: float = 0.0
    width: float = 0.0
    n_dof: int = 0
    kbt: float = 0.0
    n_nodes: int = 32

    def __post_init__(self):
        if self.kind == DISCRETE:
            m = np.asarray(self.masses, dtype=float)
            p = np.asarray(self.weights, dtype=float)
            if m.size == 0 or m.shape != p.shape:
                raise ValueError("discrete spectrum needs matching masses and weights")
            if np.any(m <= 0):
                raise ValueError("spectrum masses must be positive")
            if np.any(p < 0):
                raise ValueError("spectrum weights must be non-negative")
            if abs(p.sum() - 1.0) > _WEIGHT_TOL:
                raise ValueError("weights must sum to 1")
            object.__setattr__(self, "masses", tuple(m))
            object.__setattr__(self, "weights", tuple(p))
        elif self.kind in (GAUSSIAN, THERMAL):
            if self.kind == THERMAL:
                if self.n_dof <= 0 or self.kbt <= 0 or self.mean <= 0:
                    raise ValueError("thermal spectrum needs positive m0, N, k_B T")
                object.__setattr__(self, "width", self.kbt * np.sqrt(self.n_dof))
            if self.mean <= 0 or self.width <= 0:
                raise ValueError("gaussian spectrum needs positive mean and width")
            if self.n_nodes < 2:
                raise ValueError("need at least 2 quadrature nodes")
        else:
            raise ValueError(f"unknown spectrum kind {self.kind!r}")
        if self.mass_std / self.mean_mass >= MAX_RELATIVE_SPREAD:
            raise ValueError(
                f"relative mass spread {self.mass_std / self.mean_mass:.3g} "
                f"outside the perturbative regime (< {MAX_RELATIVE_SPREAD})")

    # -- constructors -----------------------------------------------------
    @classmethod
    def discrete(cls, pairs) -> "MassSpectrum":
        masses, weights = zip(*pairs)
        return cls(DISCRETE, masses=tuple(masses), weights=tuple(weights))

    @classmethod
    def gaussian(cls, mean: float, width: float, n_nodes: int = 32) -> "MassSpectrum":
        return cls(GAUSSIAN, mean=mean, width=width, n_nodes=n_nodes)

    @classmethod
    def thermal(cls, m0: float, n_dof: int, kbt: float, n_nodes: int = 32) -> "MassSpectrum":
        return cls(THERMAL, mean=m0, n_dof=n_dof, kbt=kbt, n_nodes=n_nodes)

    # -- moments ----------------------------------------------------------
    @property
    def mean_mass(self) -> float:
        if self.kind == DISCRETE:
            m = np.asarray(self.masses)
            p = np.asarray(self.weights)
            return float(np.sum(m * p))
        return self.mean

    @property
    def mass_std(self) -> float:
        if self.kind == DISCRETE:
            m = np.asarray(self.masses)
            p = np.asarray(self.weights)
            mb = np.sum(m * p)
            return float(np.sqrt(np.sum((m - mb) ** 2 * p)))
        return self.width

    @property
    def is_discrete(self) -> bool:
        return self.kind == DISCRETE

    def nodes(self) -> tuple[Species, ...]:
        """Quadrature nodes as weighted species (weights sum to 1)."""
        if self.kind == DISCRETE:
            return tuple(Species(m, p) for m, p in zip(self.masses, self.weights))
        x, w = np.polynomial.hermite.hermgauss(self.n_nodes)
        masses = self.mean + np.sqrt(2.0) * self.width * x
        weights = w / np.sqrt(np.pi)
        if np.any(masses <= 0):
            raise ValueError("gaussian spectrum quadrature reaches non-positive mass")
        return tuple(Species(float(m), float(p)) for m, p in zip(masses, weights))

    def shifted_to_mean(self, new_mean: float) -> "MassSpectrum":
        """Same spectrum translated so that its mean mass is ``new_mean``."""
        if self.kind == DISCRETE:
            delta = new_mean - self.mean_mass
            return MassSpectrum.discrete(
                [(m + delta, p) for m, p in zip(self.masses, self.weights)])
        if self.kind == THERMAL:
            return MassSpectrum.thermal(new_mean, self.n_dof, self.kbt, self.n_nodes)
        return MassSpectrum.gaussian(new_mean, self.width, self.n_nodes)

    def describe(self) -> str:
        if self.kind == DISCRETE:
            return f"discrete({len(self.masses)} masses, mean={self.mean_mass:g})"
        if self.kind == THERMAL:
            return (f"thermal(m0={self.mean:g}, N={self.n_dof}, "
                    f"kBT={self.kbt:g})")
        return f"gaussian(mean={self.mean:g}, width={self.width:g})"
