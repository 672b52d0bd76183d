"""FastAPI service wrapping the experiment runners.

The request body of every experiment endpoint is a full scenario
document (the same schema the CLI reads from YAML); responses are typed
pydantic models.  Start with ``massfringe serve`` or
``uvicorn massfringe.service:app``.
"""
from __future__ import annotations

from typing import List, Optional

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from .errors import ScenarioError, SimulationError
from .experiments import run_experiment
from .scenario import Scenario

app = FastAPI(
    title="massfringe",
    description="Matter-wave interferometry of composite particles: "
                "patterns, visibility curves, dephasing and revival.",
    version="0.1.0",
)


class HealthResponse(BaseModel):
    status: str
    version: str


class VisibilityOut(BaseModel):
    visibility: float
    phase: float
    method: str
    t_mean: Optional[float] = None
    spectrum: str = ""


class SpeciesPatternOut(BaseModel):
    mass: float
    sigma: List[float]


class PatternOut(BaseModel):
    Z: List[float]
    sigma_total: List[float]
    species: List[SpeciesPatternOut]
    method: str
    worldline: str
    metadata: dict


class PatternResponse(BaseModel):
    pattern: PatternOut
    t_mean: float
    alpha: Optional[float] = None
    visibility: Optional[VisibilityOut] = None


class CurveRow(BaseModel):
    t: float
    V_fit: float
    V_shorttime: Optional[float] = None
    V_phasor: float
    phi: float


class CurveResponse(BaseModel):
    rows: List[CurveRow]
    alpha: float
    worldline: str
    spectrum: str


class TauDecResponse(BaseModel):
    tau_dec_analytic: float
    tau_dec_simulated: Optional[float] = None
    relative_error: Optional[float] = None
    rows: List[CurveRow]
    alpha: float
    spectrum: str


class RevivalPoint(BaseModel):
    t: float
    V_fit: float
    V_phasor: float


class RevivalResponse(BaseModel):
    t_revival: float
    alpha: float
    spectrum: str
    always_visible: bool
    at_revival: Optional[RevivalPoint] = None
    at_half_revival: Optional[RevivalPoint] = None


class EquivalenceResponse(BaseModel):
    checks: List[dict]
    pass_ok: bool
    g: List[float]
    spectrum: str


class RunResponse(BaseModel):
    experiment: str
    result: dict


def _run_checked(s: Scenario, expected: Optional[str] = None) -> dict:
    if expected is not None and s.experiment != expected:
        raise HTTPException(status_code=422,
                            detail=f"scenario experiment is {s.experiment!r}, "
                                   f"this endpoint runs {expected!r}")
    try:
        return run_experiment(s)
    except ScenarioError as e:
        raise HTTPException(status_code=422, detail=str(e))
    except SimulationError as e:
        raise HTTPException(status_code=500, detail=str(e))


@app.get("/health", response_model=HealthResponse)
def health() -> HealthResponse:
    return HealthResponse(status="ok", version=app.version)


@app.post("/run", response_model=RunResponse)
def run_any(s: Scenario) -> RunResponse:
    return RunResponse(experiment=s.experiment, result=_run_checked(s))


@app.post("/experiments/pattern", response_model=PatternResponse)
def pattern(s: Scenario) -> PatternResponse:
    return PatternResponse(**_run_checked(s, "pattern"))


@app.post("/experiments/visibility-curve", response_model=CurveResponse)
def visibility_curve(s: Scenario) -> CurveResponse:
    return CurveResponse(**_run_checked(s, "visibility-curve"))


@app.post("/experiments/tau-dec", response_model=TauDecResponse)
def tau_dec(s: Scenario) -> TauDecResponse:
    return TauDecResponse(**_run_checked(s, "tau-dec"))


@app.post("/experiments/revival", response_model=RevivalResponse)
def revival(s: Scenario) -> RevivalResponse:
    return RevivalResponse(**_run_checked(s, "revival"))


@app.post("/experiments/frame-equivalence", response_model=EquivalenceResponse)
def frame_equivalence(s: Scenario) -> EquivalenceResponse:
    out = _run_checked(s, "frame-equivalence")
    return EquivalenceResponse(checks=out["checks"], pass_ok=out["pass"],
                               g=out["g"], spectrum=out["spectrum"])
