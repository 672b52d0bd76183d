"""Scenario configuration: YAML schema, validation, overrides.

All physical quantities are in natural units (hbar = c = 1); the
mandatory ``units: natural`` field guards against silent
misinterpretation.  Unknown keys are rejected.  See
docs/scenario-schema.md for the documented schema.
"""
from __future__ import annotations

from typing import List, Literal, Optional

import numpy as np
import yaml
from pydantic import BaseModel, ConfigDict, ValidationError, model_validator

from .errors import ScenarioError
from .labframe import GravityModel
from .spectrum import MassSpectrum
from .wavepacket import InitialState
from .worldline import ScreenWorldline

EXPERIMENTS = ("pattern", "visibility-curve", "revival", "tau-dec",
               "frame-equivalence")


class _Cfg(BaseModel):
    model_config = ConfigDict(extra="forbid")


class InitialStateCfg(_Cfg):
    kind: Literal["double-slit", "gaussian"]
    k0: float
    z1: float = 0.5
    z2: float = -0.5
    slit_width: float = 0.02
    center: float = 0.0
    width: float = 1.0
    y_width: float = 0.05
    x_width: float = 1.0


class SpectrumComponentCfg(_Cfg):
    mass: float
    weight: float


class SpectrumCfg(_Cfg):
    kind: Literal["discrete", "gaussian", "thermal"]
    components: Optional[List[SpectrumComponentCfg]] = None
    mean: Optional[float] = None
    width: Optional[float] = None
    m0: Optional[float] = None
    n_dof: Optional[int] = None
    kbt: Optional[float] = None
    nodes: int = 32

    @model_validator(mode="after")
    def _check(self):
        if self.kind == "discrete":
            if not self.components:
                raise ValueError("spectrum.components: required for the discrete kind")
            for i, c in enumerate(self.components):
                if c.mass <= 0:
                    raise ValueError(
                        f"spectrum.components[{i}].mass: must be positive")
            total = sum(c.weight for c in self.components)
            if abs(total - 1.0) > 1e-12:
                raise ValueError("spectrum.components: weights must sum to 1")
        elif self.kind == "gaussian":
            if self.mean is None or self.width is None:
                raise ValueError("spectrum.mean and spectrum.width: required "
                                 "for the gaussian kind")
        else:
            if self.m0 is None or self.n_dof is None or self.kbt is None:
                raise ValueError("spectrum.m0, spectrum.n_dof, spectrum.kbt: "
                                 "required for the thermal kind")
        return self


class WorldlineCfg(_Cfg):
    kind: Literal["rest", "uniform-velocity", "uniform-acceleration", "tabulated"]
    beta0: float = 0.0
    accel: float = 0.0
    times: Optional[List[float]] = None
    positions: Optional[List[float]] = None

    @model_validator(mode="after")
    def _check(self):
        if self.kind == "tabulated" and (self.times is None or self.positions is None):
            raise ValueError("worldline.times and worldline.positions: "
                             "required for the tabulated kind")
        return self


class GravityForceCfg(_Cfg):
    mass: float
    G: List[float]


class GravityCfg(_Cfg):
    kind: Literal["eep", "violating"]
    g: Optional[List[float]] = None
    forces: Optional[List[GravityForceCfg]] = None

    @model_validator(mode="after")
    def _check(self):
        if self.kind == "eep":
            if self.g is None or len(self.g) != 3:
                raise ValueError("gravity.g: three components required for eep")
        elif not self.forces:
            raise ValueError("gravity.forces: required for the violating kind")
        return self


class GeometryCfg(_Cfg):
    L: float


class GridCfg(_Cfg):
    points: int
    extent: float
    center: float = 0.0


class PatternGridCfg(_Cfg):
    points: int = 2001
    min: float = -20.0
    max: float = 20.0


class SweepCfg(_Cfg):
    t_min: float
    t_max: float
    points: int = 9


class ScreenCfg(_Cfg):
    z_velocity: float = 0.0
    z_offset: float = 0.0
    matched_drop: bool = False


class FitCfg(_Cfg):
    window_periods: float = 6.0


class Scenario(_Cfg):
    units: Literal["natural"]
    experiment: Literal["pattern", "visibility-curve", "revival", "tau-dec",
                        "frame-equivalence"]
    initial_state: InitialStateCfg
    spectrum: SpectrumCfg
    geometry: GeometryCfg
    worldline: Optional[WorldlineCfg] = None
    gravity: Optional[GravityCfg] = None
    screen: ScreenCfg = ScreenCfg()
    grid: Optional[GridCfg] = None
    pattern_grid: Optional[PatternGridCfg] = None
    sweep: Optional[SweepCfg] = None
    method: Literal["shifted", "full", "lab"] = "shifted"
    fit: FitCfg = FitCfg()

    @model_validator(mode="after")
    def _check(self):
        exp = self.experiment
        if exp in ("revival", "tau-dec") and self.worldline is None:
            raise ValueError(f"worldline: required for the {exp} experiment")
        if exp == "frame-equivalence" and self.gravity is None:
            raise ValueError("gravity: required for the frame-equivalence experiment")
        if exp in ("visibility-curve", "frame-equivalence") and self.sweep is None:
            raise ValueError(f"sweep: required for the {exp} experiment")
        if exp == "tau-dec" and self.spectrum.kind != "thermal":
            raise ValueError("spectrum.kind: tau-dec requires a thermal spectrum")
        if exp == "revival" and self.spectrum.kind != "discrete":
            raise ValueError("spectrum.kind: revival requires a discrete spectrum")
        if self.method == "lab" and self.gravity is None:
            raise ValueError("gravity: required when method is 'lab'")
        if exp in ("revival", "tau-dec") and self.worldline is not None \
                and self.worldline.kind != "uniform-acceleration":
            raise ValueError(
                f"worldline.kind: {exp} requires uniform-acceleration")
        return self

    # -- builders ---------------------------------------------------------
    def build_initial_state(self) -> InitialState:
        c = self.initial_state
        if c.kind == "double-slit":
            return InitialState.double_slit(c.z1, c.z2, c.slit_width, c.k0,
                                            y_width=c.y_width, x_width=c.x_width)
        return InitialState.gaussian(c.center, c.width, c.k0,
                                     y_width=c.y_width, x_width=c.x_width)

    def build_spectrum(self) -> MassSpectrum:
        c = self.spectrum
        if c.kind == "discrete":
            return MassSpectrum.discrete([(x.mass, x.weight) for x in c.components])
        if c.kind == "gaussian":
            return MassSpectrum.gaussian(c.mean, c.width, n_nodes=c.nodes)
        return MassSpectrum.thermal(c.m0, c.n_dof, c.kbt, n_nodes=c.nodes)

    def build_worldline(self) -> ScreenWorldline:
        L = self.geometry.L
        c = self.worldline
        if c is None:
            return ScreenWorldline.rest(L)
        if c.kind == "rest":
            return ScreenWorldline.rest(L)
        if c.kind == "uniform-velocity":
            return ScreenWorldline.uniform_velocity(c.beta0, L)
        if c.kind == "uniform-acceleration":
            return ScreenWorldline.uniform_acceleration(c.accel, L)
        return ScreenWorldline.tabulated(c.times, c.positions, L)

    def build_gravity(self) -> GravityModel:
        c = self.gravity
        if c.kind == "eep":
            return GravityModel.eep(c.g)
        return GravityModel.violating([(f.mass, tuple(f.G)) for f in c.forces])


def _apply_override(data: dict, dotted: str, raw: str) -> None:
    keys = dotted.split(".")
    node = data
    for k in keys[:-1]:
        node = node.setdefault(k, {})
        if not isinstance(node, dict):
            raise ScenarioError(f"override path {dotted!r} crosses a non-mapping")
    node[keys[-1]] = yaml.safe_load(raw)


def _format_validation_error(err: ValidationError) -> str:
    lines = []
    for e in err.errors():
        path = ".".join(str(p) for p in e["loc"]) or "<root>"
        lines.append(f"  {path}: {e['msg']}")
    return "scenario validation failed:\n" + "\n".join(lines)


def load_scenario(path, overrides=()) -> Scenario:
    """Parse and validate a scenario file, applying dotted-path overrides
    (``key.subkey=value``) before validation."""
    try:
        with open(path) as fh:
            data = yaml.safe_load(fh)
    except FileNotFoundError:
        raise ScenarioError(f"scenario file not found: {path}")
    except yaml.YAMLError as e:
        raise ScenarioError(f"scenario parse error: {e}")
    if not isinstance(data, dict):
        raise ScenarioError("scenario file must hold a mapping")
    for ov in overrides:
        if "=" not in ov:
            raise ScenarioError(f"override must look like key.path=value, got {ov!r}")
        key, _, raw = ov.partition("=")
        _apply_override(data, key.strip(), raw.strip())
    return validate_scenario(data)


def validate_scenario(data: dict) -> Scenario:
    try:
        return Scenario.model_validate(data)
    except ValidationError as e:
        raise ScenarioError(_format_validation_error(e))
