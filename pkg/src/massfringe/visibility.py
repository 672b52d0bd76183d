"""Closed-form dephasing analysis and visibility fitting.

The fringe contrast of a mass mixture is the magnitude of the phasor
average <exp(i dphi_m)> over the mass distribution; the short-time
expansion and the thermal decoherence time are its leading-order
specializations.  ``fit_visibility`` extracts (V', phi') from simulated
patterns by linear least squares against a locally-modulated fringe.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .errors import RegimeError
from .measurement import Pattern
from .spectrum import MassSpectrum
from .wavepacket import arrival_time
from .worldline import ScreenWorldline, UNIFORM_ACCELERATION

#: expansion-validity ceiling on the quadratic visibility correction
SHORT_TIME_LIMIT = 0.5

#: commensurability tolerance of the revival search
REVIVAL_TOL = 1e-9


@dataclass(frozen=True)
class FringeModel:
    """Local fringe model |psi|^2 = C [1 + V cos(alpha z + phi)]."""

    baseline: float = 1.0
    visibility: float = 1.0
    wavenumber: float = 1.0
    phase: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.visibility <= 1.0:
            raise ValueError("fringe visibility must be in [0, 1]")
        if self.wavenumber <= 0:
            raise ValueError("fringe wavenumber must be positive")

    @classmethod
    def double_slit(cls, k0: float, z1: float, z2: float, distance: float) -> "FringeModel":
        """Perfect-contrast fringe with alpha = k0 (z1 - z2) / L."""
        alpha = abs(k0 * (z1 - z2) / distance)
        return cls(baseline=1.0, visibility=1.0, wavenumber=alpha, phase=0.0)


@dataclass(frozen=True)
class VisibilityReport:
    visibility: float
    phase: float
    method: str
    t_mean: Optional[float] = None
    spectrum: str = ""

    def __post_init__(self):
        if not 0.0 <= self.visibility <= 1.0 + 1e-12:
            raise ValueError("visibility must be in [0, 1]")


def _wrap_phase(phi: float) -> float:
    return float((phi + np.pi) % (2 * np.pi) - np.pi)


def _window_fit(Z: np.ndarray, sigma: np.ndarray, alpha: float,
                window_periods: float):
    """Least-squares fit of sigma against {1, u, u^2} x {1, cos, sin}
    around the envelope centroid; returns (C, B, D, center)."""
    period = 2 * np.pi / alpha
    center = float(np.sum(Z * sigma) / np.sum(sigma))
    half = 0.5 * window_periods * period
    mask = np.abs(Z - center) <= half
    if np.count_nonzero(mask) < 12:
        raise ValueError("insufficient fringes: fit window holds too few samples")
    u = Z[mask] - center
    c, s = np.cos(alpha * u), np.sin(alpha * u)
    poly = [np.ones_like(u), u, u * u]
    cols = [p * f for f in (np.ones_like(u), c, s) for p in poly]
    A = np.column_stack(cols)
    coef, *_ = np.linalg.lstsq(A, sigma[mask], rcond=None)
    C, B, D = coef[0], coef[3], coef[6]
    return float(C), float(B), float(D), center


def fit_visibility(p: Pattern, alpha: float, window_periods: float = 6.0,
                   t_mean: Optional[float] = None,
                   z_reference: float = 0.0) -> VisibilityReport:
    """Extract (V', phi') from a simulated pattern: least-squares fit of
    sigma(Z) ~ C [1 + V' cos(alpha (Z - z_reference) + phi')] over the
    central envelope region, with V' >= 0 (the phase absorbs the sign)."""
    if alpha <= 0:
        raise ValueError("fringe wavenumber must be positive")
    Z, sigma = p.grid_z, p.total
    span = Z[-1] - Z[0]
    if span < 3 * 2 * np.pi / alpha:
        raise ValueError("insufficient fringes: Z grid spans fewer than 3 periods")
    C, B, D, center = _window_fit(Z, sigma, alpha, window_periods)
    amp = np.hypot(B, D)
    V = min(amp / C, 1.0) if C > 0 else 0.0
    phi = _wrap_phase(np.arctan2(-D, B) - alpha * (center - z_reference))
    return VisibilityReport(V, phi, "fit", t_mean, p.method)


def estimate_fringe_wavenumber(p: Pattern, pad_factor: int = 16) -> float:
    """Estimate alpha from the zero-padded FFT of the mean-subtracted
    pattern, with log-parabolic interpolation of the spectral peak.  The
    peak is searched above the envelope's own spectral content."""
    Z, sigma = p.grid_z, p.total
    n = len(Z)
    dz = Z[1] - Z[0]
    detrended = (sigma - sigma.mean()) * np.hanning(n)
    spec = np.abs(np.fft.rfft(detrended, pad_factor * n))
    freqs = 2 * np.pi * np.fft.rfftfreq(pad_factor * n, dz)
    # fringes must beat the envelope: at least ~1 period per RMS width
    width = np.sqrt(np.sum((Z - np.sum(Z * sigma) / np.sum(sigma)) ** 2 * sigma)
                    / np.sum(sigma))
    low = np.searchsorted(freqs, 6.0 / max(width, dz))
    if low + 2 >= len(spec) or spec[low:].max() <= 1e-9 * max(sigma.max(), 1e-300):
        raise ValueError("no oscillation detected in the pattern")
    i = low + int(np.argmax(spec[low:]))
    if 0 < i < len(spec) - 1 and spec[i - 1] > 0 and spec[i + 1] > 0:
        a, b, c = np.log(spec[i - 1: i + 2])
        shift = 0.5 * (a - c) / (a - 2 * b + c)
    else:
        shift = 0.0
    return float(freqs[i] + shift * (freqs[1] - freqs[0]))


def dephasing_phase(s: MassSpectrum, fringe: FringeModel, w: ScreenWorldline,
                    k0: float, distance: float):
    """Per-mass phase shift dphi_m = alpha * zdot_cs(t_mean) * (mbar - m) * L / k0
    at the quadrature nodes.  A rest screen yields all zeros."""
    nodes = s.nodes()
    t_mean = arrival_time(s.mean_mass, k0, distance)
    b, _ = w.beta_gamma(t_mean)
    masses = np.array([n.mass for n in nodes])
    phases = fringe.wavenumber * b * (s.mean_mass - masses) * distance / k0
    return masses, phases


def phasor_visibility(s: MassSpectrum, phases, t_mean: Optional[float] = None) -> VisibilityReport:
    """V' = |<exp(i dphi_m)>| over the mass distribution, phi' its argument."""
    phases = np.asarray(phases, dtype=float)
    if not np.all(np.isfinite(phases)):
        raise ValueError("phases must be finite")
    weights = np.array([n.weight for n in s.nodes()])
    if phases.shape != weights.shape:
        raise ValueError("need one phase per spectrum node")
    ph = np.sum(weights * np.exp(1j * phases))
    return VisibilityReport(min(float(np.abs(ph)), 1.0), float(np.angle(ph)),
                            "phasor", t_mean, s.describe())


def short_time_visibility(s: MassSpectrum, fringe: FringeModel,
                          w: ScreenWorldline, t_mean: float) -> VisibilityReport:
    """Quadratic expansion V'/V = 1 - alpha^2 zdot^2 t^2 (dm/m)^2 / 2 and
    phi' = alpha zddot t^2 (dm/m)^2 / 2, valid while the correction < 0.5."""
    alpha = fringe.wavenumber
    b, _ = w.beta_gamma(t_mean)
    rel = s.mass_std / s.mean_mass
    correction = 0.5 * (alpha * b * t_mean * rel) ** 2
    if correction >= SHORT_TIME_LIMIT:
        raise RegimeError("use phasor_visibility: short-time correction "
                          f"{correction:.3g} >= {SHORT_TIME_LIMIT}")
    V = fringe.visibility * (1.0 - correction)
    phi = 0.5 * alpha * w.zddot(t_mean) * t_mean ** 2 * rel ** 2
    return VisibilityReport(max(V, 0.0), _wrap_phase(phi), "short-time",
                            t_mean, s.describe())


def thermal_decoherence_time(n_dof: int, kbt: float, g: float, dz: float) -> float:
    """Gaussian-decay timescale sqrt(2/N) / (k_B T g |z2 - z1|)."""
    if n_dof <= 0 or kbt <= 0 or g <= 0 or dz == 0:
        raise ValueError("thermal_decoherence_time requires positive arguments")
    return np.sqrt(2.0 / n_dof) / (kbt * g * abs(dz))


def _real_gcd(values: np.ndarray, tol: float) -> float:
    g = float(values[0])
    for v in values[1:]:
        a, b = g, float(v)
        while b > tol:
            a, b = b, a % b
            if a < b:
                a, b = b, a
        g = a
    return g


def find_revival(s: MassSpectrum, fringe: FringeModel, w: ScreenWorldline,
                 k0: float, distance: float) -> float:
    """Smallest t_mean > 0 at which every pairwise dephasing difference is
    a multiple of 2 pi (discrete spectra on a uniformly accelerating
    screen).  Returns 0 for a single mass (always visible)."""
    if not s.is_discrete:
        raise ValueError("no exact revival: continuous spectrum")
    if w.kind != UNIFORM_ACCELERATION or w.accel == 0.0:
        raise ValueError("revival search requires a uniform-acceleration worldline")
    masses = np.unique(np.asarray(s.masses))
    if masses.size < 2:
        return 0.0
    # dphi_m(t) = alpha g t (mbar - m) L / k0: pairwise rates scale with
    # pairwise mass differences
    rate_unit = fringe.wavenumber * abs(w.accel) * distance / k0
    diffs = np.abs(masses[:, None] - masses[None, :])
    diffs = diffs[diffs > 0]
    tol = REVIVAL_TOL * diffs.max()
    gcd = _real_gcd(np.sort(diffs), tol)
    ratios = diffs / gcd
    if np.any(np.abs(ratios - np.round(ratios)) > 1e-6):
        raise ValueError("no exact revival: incommensurate mass spacings")
    return float(2 * np.pi / (rate_unit * gcd))


def proper_time_visibility(s: MassSpectrum, dtau: float) -> VisibilityReport:
    """Characteristic function of the internal-energy offset evaluated at
    the proper-time difference dtau; identical to the phasor average with
    dphi_m = (mbar - m) dtau."""
    if not np.isfinite(dtau):
        raise ValueError("dtau must be finite")
    masses = np.array([n.mass for n in s.nodes()])
    phases = (s.mean_mass - masses) * dtau
    rep = phasor_visibility(s, phases)
    return replace(rep, method="proper-time")


def write_visibility_curve_csv(rows, path) -> None:
    """Columns: t, V_fit, V_shorttime, V_phasor, phi."""
    def fmt(v) -> str:
        if v is None or v != v:
            return "nan"
        return f"{v:.12g}"

    with open(path, "w") as fh:
        fh.write("t,V_fit,V_shorttime,V_phasor,phi\n")
        for r in rows:
            fh.write(",".join(
                fmt(r[k])
                for k in ("t", "V_fit", "V_shorttime", "V_phasor", "phi")) + "\n")
