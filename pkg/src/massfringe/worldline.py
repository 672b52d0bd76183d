"""Transverse trajectory of the detector's central pixel and its proper
reference frame.

The uniform-acceleration kind is parametrized by the lab-frame law
z(t) = g t^2 / 2; all visibility results live in the gamma ~ 1 regime.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

from .errors import PatchError, RegimeError

REST = "rest"
UNIFORM_VELOCITY = "uniform-velocity"
UNIFORM_ACCELERATION = "uniform-acceleration"
TABULATED = "tabulated"

#: fraction of the |beta| = 1 horizon kept inside the validity interval
_ACCEL_SAFETY = 0.99

#: absolute tolerance of the tau <-> t inversion
_INVERSION_TOL = 1e-12


@dataclass(frozen=True)
class ProperFramePoint:
    """Point (tau, X, Y, Z) in the central pixel's proper reference frame."""

    tau: float
    X: float = 0.0
    Y: float = 0.0
    Z: float = 0.0


@dataclass(frozen=True)
class ScreenWorldline:
    kind: str
    screen_distance: float
    beta0: float = 0.0
    accel: float = 0.0
    times: Optional[np.ndarray] = field(default=None)
    positions: Optional[np.ndarray] = field(default=None)
    t_min: float = -np.inf
    t_max: float = np.inf

    def __post_init__(self):
        if self.kind == UNIFORM_VELOCITY and abs(self.beta0) >= 1:
            raise RegimeError("superluminal worldline")
        if self.kind == TABULATED:
            t = np.asarray(self.times, dtype=float)
            z = np.asarray(self.positions, dtype=float)
            if t.ndim != 1 or t.shape != z.shape or t.size < 4:
                raise ValueError("tabulated worldline needs matching 1D arrays "
                                 "with at least 4 samples")
            if np.any(np.diff(t) <= 0):
                raise ValueError("tabulated times must be strictly increasing")
            object.__setattr__(self, "times", t)
            object.__setattr__(self, "positions", z)
            object.__setattr__(self, "t_min", float(t[0]))
            object.__setattr__(self, "t_max", float(t[-1]))
        elif self.kind == UNIFORM_ACCELERATION:
            if self.accel != 0.0:
                horizon = _ACCEL_SAFETY / abs(self.accel)
                object.__setattr__(self, "t_min", -horizon)
                object.__setattr__(self, "t_max", horizon)
        elif self.kind not in (REST, UNIFORM_VELOCITY):
            raise ValueError(f"unknown worldline kind {self.kind!r}")

    # -- constructors -----------------------------------------------------
    @classmethod
    def rest(cls, screen_distance: float) -> "ScreenWorldline":
        return cls(REST, screen_distance)

    @classmethod
    def uniform_velocity(cls, beta0: float, screen_distance: float) -> "ScreenWorldline":
        return cls(UNIFORM_VELOCITY, screen_distance, beta0=beta0)

    @classmethod
    def uniform_acceleration(cls, accel: float, screen_distance: float) -> "ScreenWorldline":
        return cls(UNIFORM_ACCELERATION, screen_distance, accel=accel)

    @classmethod
    def tabulated(cls, times, positions, screen_distance: float) -> "ScreenWorldline":
        return cls(TABULATED, screen_distance,
                   times=np.asarray(times, dtype=float),
                   positions=np.asarray(positions, dtype=float))

    @cached_property
    def _spline(self) -> CubicSpline:
        return CubicSpline(self.times, self.positions)

    def describe(self) -> str:
        if self.kind == UNIFORM_VELOCITY:
            return f"uniform-velocity(beta0={self.beta0:g})"
        if self.kind == UNIFORM_ACCELERATION:
            return f"uniform-acceleration(g={self.accel:g})"
        return self.kind

    # -- kinematics -------------------------------------------------------
    def _check_t(self, t: float) -> None:
        if not (self.t_min <= t <= self.t_max):
            raise PatchError(
                f"t={t:g} outside worldline validity [{self.t_min:g}, {self.t_max:g}]")

    def z_of_t(self, t: float) -> float:
        """Central pixel z position at Minkowski coordinate time t."""
        self._check_t(t)
        if self.kind == REST:
            return 0.0
        if self.kind == UNIFORM_VELOCITY:
            return self.beta0 * t
        if self.kind == UNIFORM_ACCELERATION:
            return 0.5 * self.accel * t ** 2
        return float(self._spline(t))

    def beta(self, t: float) -> float:
        self._check_t(t)
        if self.kind == REST:
            return 0.0
        if self.kind == UNIFORM_VELOCITY:
            return self.beta0
        if self.kind == UNIFORM_ACCELERATION:
            return self.accel * t
        b = float(self._spline(t, 1))
        if abs(b) >= 1:
            raise RegimeError("superluminal worldline")
        return b

    def beta_gamma(self, t: float) -> tuple[float, float]:
        b = self.beta(t)
        if abs(b) >= 1:
            raise RegimeError("superluminal worldline")
        return b, 1.0 / np.sqrt(1.0 - b * b)

    def zddot(self, t: float) -> float:
        """Coordinate acceleration d(beta)/dt."""
        self._check_t(t)
        if self.kind in (REST, UNIFORM_VELOCITY):
            return 0.0
        if self.kind == UNIFORM_ACCELERATION:
            return self.accel
        return float(self._spline(t, 2))

    def proper_acceleration(self, t: float) -> float:
        """g = gamma^2 * d(beta)/dt."""
        _, gamma = self.beta_gamma(t)
        return gamma ** 2 * self.zddot(t)

    # -- proper time ------------------------------------------------------
    def proper_time(self, t: float) -> float:
        """tau(t) along the central pixel, with tau(0) = 0."""
        self._check_t(t)
        if self.kind == REST:
            return t
        if self.kind == UNIFORM_VELOCITY:
            return t * np.sqrt(1 - self.beta0 ** 2)
        if self.kind == UNIFORM_ACCELERATION:
            g = self.accel
            if g == 0.0:
                return t
            gt = g * t
            return 0.5 * (t * np.sqrt(1 - gt ** 2) + np.arcsin(gt) / g)
        return float(self._tau_spline(t))

    @cached_property
    def _tau_spline(self) -> CubicSpline:
        # antiderivative of 1/gamma on a dense grid; tau(times[0]) anchored
        # so that tau(0) = 0 when 0 is inside the tabulated range
        t = np.linspace(self.t_min, self.t_max, max(4 * self.times.size, 512))
        inv_gamma = np.sqrt(np.clip(1.0 - self._spline(t, 1) ** 2, 0.0, None))
        sp = CubicSpline(t, inv_gamma).antiderivative()
        if self.t_min <= 0.0 <= self.t_max:
            offset = float(sp(0.0))
        else:
            offset = float(sp(self.t_min))
        return lambda x: sp(x) - offset  # type: ignore[return-value]

    def coordinate_time(self, tau: float) -> float:
        """Monotone inversion t(tau), tolerance 1e-12 in t."""
        if self.kind == REST:
            return tau
        if self.kind == UNIFORM_VELOCITY:
            return tau / np.sqrt(1 - self.beta0 ** 2)
        if self.kind == UNIFORM_ACCELERATION and self.accel == 0.0:
            return tau
        lo, hi = self.t_min, self.t_max
        if not (self.proper_time(lo) <= tau <= self.proper_time(hi)):
            raise PatchError(f"tau={tau:g} outside worldline validity")
        return float(brentq(lambda t: self.proper_time(t) - tau, lo, hi,
                            xtol=_INVERSION_TOL))


def proper_to_minkowski(w: ScreenWorldline, p: ProperFramePoint) -> tuple[float, float, float, float]:
    """Map a proper-frame point to Minkowski coordinates
    [t_cs(tau) + beta gamma Z, X, Y + L, z_cs(tau) + gamma Z]."""
    t = w.coordinate_time(p.tau)
    b, gamma = w.beta_gamma(t)
    g = w.proper_acceleration(t)
    if abs(g * p.Z) >= 1:
        raise PatchError("outside proper-frame patch: |g Z| >= 1")
    return (t + b * gamma * p.Z,
            p.X,
            p.Y + w.screen_distance,
            w.z_of_t(t) + gamma * p.Z)
