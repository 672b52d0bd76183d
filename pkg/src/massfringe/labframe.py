"""Direct lab-frame evolution under uniform gravity and EEP-violating
variants, plus the cross-frame equivalence check.

Sign conventions: with the equivalence-principle Hamiltonian
H = p^2/2m + m g.x the mean trajectory is x0 + p0 t/m - g t^2/2; the
violating Hamiltonian H = p^2/2m - G.x displaces by +(G_m/m) t^2/2.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import NumericalError
from .grids import GridSpec, WavefunctionGrid, ensure_band_limited, to_momentum, to_position
from .measurement import (LAB_FLUX, Pattern, density_interpolator, total_pattern,
                          CROSSING_WINDOW_SIGMAS)
from .spectrum import MassSpectrum
from .visibility import FringeModel, fit_visibility
from .wavepacket import InitialState, Species, arrival_time
from .worldline import ScreenWorldline

EEP = "eep"
VIOLATING = "violating"

#: Ehrenfest acceptance: centroid error as a fraction of the packet width
EHRENFEST_TOL = 1e-3

_MASS_MATCH_RTOL = 1e-9


@dataclass(frozen=True)
class GravityModel:
    kind: str
    g: tuple = (0.0, 0.0, 0.0)
    forces: tuple = ()  # ((mass, (Gx, Gy, Gz)), ...) for the violating kind

    def __post_init__(self):
        if self.kind not in (EEP, VIOLATING):
            raise ValueError(f"unknown gravity model kind {self.kind!r}")
        if self.kind == VIOLATING and not self.forces:
            raise ValueError("violating model needs per-species forces")

    @classmethod
    def eep(cls, g: Sequence[float]) -> "GravityModel":
        return cls(EEP, g=tuple(float(c) for c in g))

    @classmethod
    def violating(cls, forces) -> "GravityModel":
        return cls(VIOLATING,
                   forces=tuple((float(m), tuple(float(c) for c in G))
                                for m, G in forces))

    def force_on(self, mass: float) -> np.ndarray:
        """Force vector acting on the species of the given rest mass."""
        if self.kind == EEP:
            return -mass * np.asarray(self.g, dtype=float)
        for m, G in self.forces:
            if abs(m - mass) <= _MASS_MATCH_RTOL * max(m, mass):
                return np.asarray(G, dtype=float)
        raise ValueError(f"no force configured for species mass {mass:g}")

    def acceleration_of(self, mass: float) -> np.ndarray:
        return self.force_on(mass) / mass


@dataclass(frozen=True)
class HeisenbergTrajectory:
    """Mean trajectory of a species under the configured force model."""

    x0: tuple
    p0: tuple
    mass: float
    model: GravityModel


def heisenberg_mean(traj: HeisenbergTrajectory, t: float) -> np.ndarray:
    """x0 + p0 t/m + a t^2/2 with a = F/m (equals -g for the EEP kind)."""
    x0 = np.asarray(traj.x0, dtype=float)
    p0 = np.asarray(traj.p0, dtype=float)
    a = traj.model.acceleration_of(traj.mass)
    return x0 + p0 * t / traj.mass + 0.5 * a * t ** 2


def evolve_packet_lab(psi: WavefunctionGrid, species: Species,
                      model: GravityModel, t: float,
                      n_steps: int = 16) -> WavefunctionGrid:
    """Strang-split evolution of the z profile under H = p^2/2m + V with
    the uniform force taken from the model.  For a linear potential the
    splitting is exact up to a global phase; the Ehrenfest check below
    still guards grid-resolution failures."""
    if t < 0:
        raise ValueError("invalid time: t must be >= 0")
    if n_steps < 1:
        raise ValueError("need at least one split step")
    if t == 0:
        return psi
    m = species.mass
    fz = model.force_on(m)[2]  # V(z) = -F_z z
    z = psi.coords()
    f0 = to_momentum(psi)
    k = f0.coords()
    z0 = psi.centroid()
    p0 = float(np.sum(k * np.abs(f0.values) ** 2) / np.sum(np.abs(f0.values) ** 2))

    dt = t / n_steps
    half_v = np.exp(1j * fz * z * (0.5 * dt))
    kin = np.exp(-0.5j * k ** 2 * dt / m)
    vals = psi.values
    for _ in range(n_steps):
        vals = vals * half_v
        g = to_momentum(WavefunctionGrid(psi.axis, psi.spec, vals))
        g = WavefunctionGrid(g.axis, g.spec, g.values * kin, "momentum")
        vals = to_position(g, center=psi.spec.center).values
        vals = vals * half_v
    out = WavefunctionGrid(psi.axis, psi.spec, vals, "position", psi.carrier)
    ensure_band_limited(out)

    expected = z0 + p0 * t / m + 0.5 * (fz / m) * t ** 2
    width = out.width()
    err = abs(out.centroid() - expected)
    if err > EHRENFEST_TOL * width:
        raise NumericalError(
            f"split-step accuracy: centroid error {err:.3g} exceeds "
            f"{EHRENFEST_TOL:.0e} of the packet width {width:.3g}; "
            "increase n_steps or the grid resolution")
    return out


def matched_drop_screen(model: GravityModel, mean_mass: float,
                        t_ref: float) -> tuple[float, float]:
    """Screen z velocity and offset matching the packets' fall at t_ref:
    z_s(t) = offset + velocity * t is tangent to the mean fall curve."""
    a = model.acceleration_of(mean_mass)[2]
    return a * t_ref, -0.5 * a * t_ref ** 2


def lab_pattern(ini: InitialState, spectrum: MassSpectrum, model: GravityModel,
                distance: float, zgrid: GridSpec, Z: np.ndarray,
                screen_z_velocity: float = 0.0, screen_z_offset: float = 0.0,
                n_steps: int = 64, max_steps: int = 4096,
                rel_tol: float = 1e-3) -> Pattern:
    """Flux accumulated at the lab plane y = L as each species crosses,
    with an optional uniformly moving screen z_s(t) = offset + v t.
    Pattern coordinate Z is measured relative to the screen center."""
    nodes = spectrum.nodes()
    per = [_lab_species_pattern(ini, sp, model, distance, zgrid, Z,
                                screen_z_velocity, screen_z_offset,
                                n_steps, max_steps, rel_tol)
           for sp in nodes]
    return total_pattern(per, [sp.weight for sp in nodes])


def _lab_species_pattern(ini, species, model, distance, zgrid, Z,
                         v_screen, z_offset, n_steps, max_steps, rel_tol) -> Pattern:
    ini.check_mass(species.mass)
    v = species.velocity(ini.k0)
    t_m = arrival_time(species.mass, ini.k0, distance)
    half = CROSSING_WINDOW_SIGMAS * ini.y_width / v
    t_a, t_b = t_m - half, t_m + half
    psi0 = ini.z_envelope(zgrid)

    def sigma_with(n: int) -> np.ndarray:
        ts = np.linspace(t_a, t_b, n + 1)
        psi_t = evolve_packet_lab(psi0, species, model, ts[0], n_steps=4)
        acc = np.zeros_like(Z)
        for j, t in enumerate(ts):
            if j > 0:
                psi_t = evolve_packet_lab(psi_t, species, model,
                                          ts[j] - ts[j - 1], n_steps=1)
            dens = density_interpolator(psi_t)
            zs = z_offset + v_screen * t
            row = ini.y_density(distance - v * t) * dens(zs + Z)
            wgt = 0.5 if j in (0, n) else 1.0
            acc += wgt * row
        return v * acc * (t_b - t_a) / n

    sigma = sigma_with(n_steps)
    n = n_steps
    while True:
        n *= 2
        if n > max_steps:
            raise NumericalError(
                f"lab flux quadrature did not converge below {rel_tol:g} "
                f"within {max_steps} steps")
        refined = sigma_with(n)
        if np.max(np.abs(refined - sigma)) <= rel_tol * max(refined.max(), 1e-300):
            sigma = refined
            break
        sigma = refined

    desc = "lab-static" if v_screen == 0 and z_offset == 0 else (
        f"lab-moving(v={v_screen:g}, z0={z_offset:g})")
    return Pattern(np.asarray(Z, dtype=float), sigma, (species.mass,),
                   sigma[np.newaxis, :], LAB_FLUX, desc,
                   {"t_m": t_m, "quadrature_steps": n})


def eep_violation_separation(spectrum: MassSpectrum, model: GravityModel,
                             t: float):
    """Per-species z displacement (G_m/m) t^2 / 2 under the violating
    model; the spread across species vanishes iff G_m/m is constant."""
    if model.kind != VIOLATING:
        raise ValueError("eep_violation_separation requires the violating kind")
    nodes = spectrum.nodes()
    masses = np.array([n.mass for n in nodes])
    disp = np.array([0.5 * model.acceleration_of(n.mass)[2] * t ** 2
                     for n in nodes])
    return masses, disp


def frame_equivalence_check(ini: InitialState, spectrum: MassSpectrum,
                            g: Sequence[float], distance: float,
                            zgrid_free: GridSpec, zgrid_lab: GridSpec,
                            Z: np.ndarray, fringe: FringeModel,
                            rms_limit: float = 0.01,
                            dv_limit: float = 0.01) -> dict:
    """Run (a) the lab pipeline with a static screen under gravity g and
    (b) the Lorentz pipeline with free packets and a screen uniformly
    accelerating at -g_z, and report their agreement."""
    from .measurement import integrate_pattern_full  # local to avoid cycle

    model = GravityModel.eep(g)
    g_z = float(model.g[2])
    nodes = spectrum.nodes()
    t_mean = arrival_time(spectrum.mean_mass, ini.k0, distance)

    lab = lab_pattern(ini, spectrum, model, distance, zgrid_lab, Z)

    w = ScreenWorldline.uniform_acceleration(g_z, distance)
    per = [integrate_pattern_full(ini, sp, w, zgrid_free, Z) for sp in nodes]
    lorentz = total_pattern(per, [sp.weight for sp in nodes])

    peak = max(lab.peak(), lorentz.peak())
    rms = float(np.sqrt(np.mean((lab.total - lorentz.total) ** 2)) / peak)
    zref = -w.z_of_t(t_mean)
    v_lab = fit_visibility(lab, fringe.wavenumber, t_mean=t_mean,
                           z_reference=zref)
    v_lor = fit_visibility(lorentz, fringe.wavenumber, t_mean=t_mean,
                           z_reference=zref)
    dv = abs(v_lab.visibility - v_lor.visibility)
    return {
        "rms_pattern_diff": rms,
        "delta_visibility": float(dv),
        "pass": bool(rms <= rms_limit and dv <= dv_limit),
        "visibility_lab": v_lab.visibility,
        "visibility_lorentz": v_lor.visibility,
        "t_mean": float(t_mean),
        "g": [float(c) for c in model.g],
        "distance": float(distance),
        "spectrum": spectrum.describe(),
    }
