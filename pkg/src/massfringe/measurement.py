"""Particle count per proper area on the screen.

Two independent computational paths:

* ``integrate_pattern_full`` -- flux integral of the probability current
  over the crossing window, with the packet evolved spectrally and the
  screen worldline sampled in coordinate time:
  sigma_m(Z) = v_m * integral gamma |psi_m[t, z_cs(t) + Z/gamma]|^2 *
  rho_y(L - v_m t) dt.
* ``integrate_pattern_shifted`` -- the analytic gamma ~ 1 reduction:
  a rigid translation of the arrival fringe by z_cs(t_m).

Their agreement in the low-velocity regime is an acceptance criterion.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import json

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import NumericalError, PatchError, RegimeError
from .grids import GridSpec, WavefunctionGrid, to_momentum, to_position
from .wavepacket import InitialState, Species, arrival_time
from .worldline import ScreenWorldline

FULL_FLUX = "full-flux"
SHIFTED = "shifted-pattern"
LAB_FLUX = "lab-flux"

#: squared screen velocity above which the shifted path refuses to run
MAX_BETA_SQ_SHIFTED = 1e-3

#: half-width of the crossing window in units of the y envelope width
CROSSING_WINDOW_SIGMAS = 6.0


@dataclass(frozen=True)
class Pattern:
    """Count density per proper area versus the screen coordinate Z."""

    grid_z: np.ndarray
    total: np.ndarray
    species_masses: tuple
    per_species: np.ndarray  # shape (n_species, nZ)
    method: str
    worldline: str
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.total.shape != self.grid_z.shape:
            raise ValueError("pattern arrays do not match the Z grid")
        if np.any(self.total < -1e-15 * max(self.total.max(), 1.0)):
            raise ValueError("pattern density must be non-negative")

    def peak(self) -> float:
        return float(self.total.max())

    def to_dict(self) -> dict:
        return {
            "Z": [float(z) for z in self.grid_z],
            "sigma_total": [float(s) for s in self.total],
            "species": [
                {"mass": float(m), "sigma": [float(s) for s in row]}
                for m, row in zip(self.species_masses, self.per_species)
            ],
            "method": self.method,
            "worldline": self.worldline,
            "metadata": self.metadata,
        }

    def to_csv(self, path) -> None:
        write_pattern_csv(self.to_dict(), path)

    def to_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)


def write_pattern_csv(data: dict, path) -> None:
    """Columns: Z, sigma_total, sigma_m1, ... with 12 significant digits."""
    masses = [sp["mass"] for sp in data["species"]]
    header = "Z,sigma_total," + ",".join(f"sigma_m{m:g}" for m in masses)
    cols = [data["Z"], data["sigma_total"]] + [sp["sigma"] for sp in data["species"]]
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for row in zip(*cols):
            fh.write(",".join(f"{v:.12g}" for v in row) + "\n")


@dataclass(frozen=True)
class SamplingTrajectory:
    """Path along which the screen pixel (X, Z) samples the arrival packet:
    w -> [y, z] = [L - w, z_cs(t_m + w/v_m) + Z/gamma]."""

    worldline: ScreenWorldline
    species: Species
    k0: float
    pixel: tuple = (0.0, 0.0)

    def position(self, w) -> tuple[np.ndarray, np.ndarray]:
        v = self.species.velocity(self.k0)
        t_m = arrival_time(self.species.mass, self.k0, self.worldline.screen_distance)
        w = np.atleast_1d(np.asarray(w, dtype=float))
        y = self.worldline.screen_distance - w
        z = np.empty_like(w)
        _, Z = self.pixel
        for i, wi in enumerate(w):
            t = t_m + wi / v
            _, gamma = self.worldline.beta_gamma(t)
            z[i] = self.worldline.z_of_t(t) + Z / gamma
        return y, z


def density_interpolator(psi: WavefunctionGrid):
    """Cubic interpolant of |psi|^2, clipped at zero outside support."""
    sp = CubicSpline(psi.coords(), psi.density())
    lo, hi = psi.coords()[0], psi.coords()[-1]

    def dens(z):
        z = np.asarray(z, dtype=float)
        out = sp(np.clip(z, lo, hi))
        out = np.where((z < lo) | (z > hi), 0.0, out)
        return np.clip(out, 0.0, None)

    return dens


def flux_rate(psi: WavefunctionGrid, species: Species, k0: float,
              w: ScreenWorldline, pixel: tuple, t: float,
              y_density: float = 1.0, x_intensity: float = 1.0) -> float:
    """Particles per proper area per coordinate time at the pixel (X, Z):
    v_m (1 + g Z) |psi(z_cs(t) + Z/gamma)|^2, times the analytic x/y factors."""
    X, Z = pixel
    g = w.proper_acceleration(t)
    if abs(g * Z) >= 1:
        raise PatchError("pixel outside proper-frame patch: |g Z| >= 1")
    _, gamma = w.beta_gamma(t)
    v = species.velocity(k0)
    dens = density_interpolator(psi)
    val = float(dens(w.z_of_t(t) + Z / gamma))
    return v * (1.0 + g * Z) * val * y_density * x_intensity


def _crossing_window(ini: InitialState, species: Species, w: ScreenWorldline):
    v = species.velocity(ini.k0)
    t_m = arrival_time(species.mass, ini.k0, w.screen_distance)
    half = CROSSING_WINDOW_SIGMAS * ini.y_width / v
    t_a, t_b = t_m - half, t_m + half
    if t_a < w.t_min or t_b > w.t_max:
        raise PatchError("screen not present at arrival: crossing window "
                         f"[{t_a:g}, {t_b:g}] exceeds worldline validity")
    return t_m, t_a, t_b


def integrate_pattern_full(ini: InitialState, species: Species,
                           w: ScreenWorldline, zgrid: GridSpec,
                           Z: np.ndarray, n_steps: int = 64,
                           max_steps: int = 4096,
                           rel_tol: float = 1e-3) -> Pattern:
    """Per-species pattern by composite trapezoid quadrature of the flux
    over the crossing window, refined until the change is below rel_tol."""
    ini.check_mass(species.mass)
    v = species.velocity(ini.k0)
    t_m, t_a, t_b = _crossing_window(ini, species, w)
    f = to_momentum(ini.z_envelope(zgrid))
    k = f.coords()
    L = w.screen_distance

    def sigma_with(n: int) -> np.ndarray:
        ts = np.linspace(t_a, t_b, n + 1)
        acc = np.zeros_like(Z)
        for j, t in enumerate(ts):
            psi_t = to_position(
                WavefunctionGrid(f.axis, f.spec,
                                 f.values * np.exp(-0.5j * k ** 2 * t / species.mass),
                                 "momentum"),
                center=zgrid.center)
            dens = density_interpolator(psi_t)
            b, gamma = w.beta_gamma(t)
            row = gamma * ini.y_density(L - v * t) * dens(w.z_of_t(t) + Z / gamma)
            wgt = 0.5 if j in (0, n) else 1.0
            acc += wgt * row
        return v * acc * (t_b - t_a) / n

    sigma = sigma_with(n_steps)
    n = n_steps
    while True:
        n *= 2
        if n > max_steps:
            raise NumericalError(
                f"flux quadrature did not converge below {rel_tol:g} "
                f"within {max_steps} steps")
        refined = sigma_with(n)
        if np.max(np.abs(refined - sigma)) <= rel_tol * max(refined.max(), 1e-300):
            sigma = refined
            break
        sigma = refined

    return Pattern(np.asarray(Z, dtype=float), sigma, (species.mass,),
                   sigma[np.newaxis, :], FULL_FLUX, w.describe(),
                   {"t_m": t_m, "quadrature_steps": n})


def integrate_pattern_shifted(psi_fin: WavefunctionGrid, species: Species,
                              w: ScreenWorldline, Z: np.ndarray,
                              k0: float) -> Pattern:
    """Fast path: sigma_m(Z) = |psi_fin(z_cs(t_m) + Z)|^2, a rigid
    translation of the arrival fringe.  Requires beta^2 < 1e-3."""
    t_m = arrival_time(species.mass, k0, w.screen_distance)
    b, _ = w.beta_gamma(t_m)
    if b * b >= MAX_BETA_SQ_SHIFTED:
        raise RegimeError("use full-flux method: screen beta^2 = "
                          f"{b * b:.2e} >= {MAX_BETA_SQ_SHIFTED}")
    dens = density_interpolator(psi_fin)
    sigma = dens(w.z_of_t(t_m) + np.asarray(Z, dtype=float))
    return Pattern(np.asarray(Z, dtype=float), sigma, (species.mass,),
                   sigma[np.newaxis, :], SHIFTED, w.describe(), {"t_m": t_m})


def total_pattern(patterns: Sequence[Pattern], weights: Sequence[float]) -> Pattern:
    """Weighted sum over species patterns on a common Z grid."""
    if len(patterns) != len(weights) or not patterns:
        raise ValueError("need one weight per species pattern")
    Z = patterns[0].grid_z
    for p in patterns[1:]:
        if p.grid_z.shape != Z.shape or not np.allclose(p.grid_z, Z):
            raise ValueError("mismatched grids across species patterns")
    rows = np.vstack([p.total for p in patterns])
    wts = np.asarray(weights, dtype=float)
    sigma = wts @ rows
    masses = tuple(p.species_masses[0] for p in patterns)
    meta = {"weights": [float(x) for x in wts]}
    return Pattern(Z, sigma, masses, rows, patterns[0].method,
                   patterns[0].worldline, meta)
