"""Experiment runners shared by the CLI and the HTTP service.

Each runner takes a validated Scenario and returns a plain dict; the
writer functions turn those dicts into the CSV/JSON output files.  All
quadrature node counts and grids are fixed by the scenario, so identical
scenarios produce identical outputs.
"""
from __future__ import annotations

import json
import os
from typing import Optional

import numpy as np

from .errors import ScenarioError
from .grids import GridSpec
from .labframe import (GravityModel, frame_equivalence_check, lab_pattern,
                       matched_drop_screen)
from .measurement import (Pattern, integrate_pattern_full,
                          integrate_pattern_shifted, total_pattern,
                          write_pattern_csv, CROSSING_WINDOW_SIGMAS)
from .scenario import Scenario
from .spectrum import MassSpectrum
from .visibility import (FringeModel, dephasing_phase, fit_visibility,
                         phasor_visibility, short_time_visibility,
                         thermal_decoherence_time, find_revival,
                         write_visibility_curve_csv)
from .wavepacket import InitialState, arrival_time, final_packet
from .worldline import ScreenWorldline

_MAX_GRID_POINTS = 1 << 17


def _pow2_at_least(n: float) -> int:
    p = 2
    while p < n:
        p *= 2
    return min(p, _MAX_GRID_POINTS)


def _envelope(ini: InitialState, distance: float) -> tuple[float, float, float]:
    """(half-extent at arrival, bandwidth limit, initial feature size)."""
    if ini.kind == "double-slit":
        eps = ini.slit_width
        w_fin = eps * np.sqrt(1 + (distance / (ini.k0 * eps ** 2)) ** 2)
        half = max(abs(ini.z1), abs(ini.z2)) + 6.0 * w_fin
        return half, 6.2 / eps, eps
    w = ini.width
    w_fin = w * np.sqrt(1 + (distance / (ini.k0 * w ** 2)) ** 2)
    return abs(ini.center) + 6.0 * w_fin, 6.2 / w, w


def free_zgrid(ini: InitialState, distance: float,
               cfg=None) -> GridSpec:
    """z grid large and fine enough for free propagation to the screen."""
    if cfg is not None:
        return GridSpec(cfg.points, cfg.extent, cfg.center)
    half, k_lim, _ = _envelope(ini, distance)
    dz = np.pi / (1.25 * k_lim)
    n = _pow2_at_least(2 * half / dz)
    return GridSpec(n, n * dz, 0.0)


def lab_zgrid(ini: InitialState, spectrum: MassSpectrum, model: GravityModel,
              distance: float, cfg=None) -> GridSpec:
    """z grid accommodating the gravitational fall and momentum gain."""
    if cfg is not None:
        return GridSpec(cfg.points, cfg.extent, cfg.center)
    half, k_lim, _ = _envelope(ini, distance)
    lo = hi = 0.0
    k_extra = 0.0
    for sp in spectrum.nodes():
        a_z = model.acceleration_of(sp.mass)[2]
        t_end = arrival_time(sp.mass, ini.k0, distance) * (
            1 + CROSSING_WINDOW_SIGMAS * ini.y_width / distance)
        disp = 0.5 * a_z * t_end ** 2
        lo, hi = min(lo, disp), max(hi, disp)
        k_extra = max(k_extra, abs(sp.mass * a_z * t_end))
    k_lim = k_lim + 1.1 * k_extra
    dz = np.pi / (1.25 * k_lim)
    span = (hi - lo) * 1.05 + 2 * half
    n = _pow2_at_least(span / dz)
    return GridSpec(n, n * dz, 0.5 * (lo + hi))


def pattern_Zgrid(center: float, half: float, alpha: Optional[float],
                  cfg=None) -> np.ndarray:
    if cfg is not None:
        return np.linspace(cfg.min, cfg.max, cfg.points)
    dZ = (2 * np.pi / alpha / 32.0) if alpha else half / 1000.0
    n = int(np.ceil(2 * half / dZ)) | 1
    return np.linspace(center - half, center + half, n)


def _fringe(s: Scenario) -> Optional[FringeModel]:
    c = s.initial_state
    if c.kind != "double-slit":
        return None
    return FringeModel.double_slit(c.k0, c.z1, c.z2, s.geometry.L)


def _simulate_total(ini, spectrum, w, method, zgrid, Z,
                    psi_fin=None) -> Pattern:
    nodes = spectrum.nodes()
    if method == "shifted":
        if psi_fin is None:
            psi_fin = final_packet(ini, w.screen_distance, zgrid)
        per = [integrate_pattern_shifted(psi_fin, sp, w, Z, ini.k0)
               for sp in nodes]
    else:
        per = [integrate_pattern_full(ini, sp, w, zgrid, Z) for sp in nodes]
    return total_pattern(per, [sp.weight for sp in nodes])


def _report_dict(rep) -> dict:
    return {"visibility": rep.visibility, "phase": rep.phase,
            "method": rep.method, "t_mean": rep.t_mean,
            "spectrum": rep.spectrum}


# ---------------------------------------------------------------------------
# experiment: pattern
# ---------------------------------------------------------------------------

def run_pattern(s: Scenario) -> dict:
    ini = s.build_initial_state()
    spectrum = s.build_spectrum()
    L = s.geometry.L
    fringe = _fringe(s)
    t_mean = arrival_time(spectrum.mean_mass, ini.k0, L)
    half_env, _, _ = _envelope(ini, L)
    alpha = fringe.wavenumber if fringe else None

    if s.method == "lab":
        model = s.build_gravity()
        zgrid = lab_zgrid(ini, spectrum, model, L, s.grid)
        if s.screen.matched_drop:
            v_s, z_s = matched_drop_screen(model, spectrum.mean_mass, t_mean)
        else:
            v_s, z_s = s.screen.z_velocity, s.screen.z_offset
        a_z = (model.acceleration_of(spectrum.mean_mass)[2]
               if model.kind == "eep" else
               max(model.acceleration_of(n.mass)[2] for n in spectrum.nodes()))
        center = 0.5 * a_z * t_mean ** 2 - (z_s + v_s * t_mean)
        Z = pattern_Zgrid(center, half_env, alpha, s.pattern_grid)
        pat = lab_pattern(ini, spectrum, model, L, zgrid, Z,
                          screen_z_velocity=v_s, screen_z_offset=z_s)
        shift_ref = -center
    else:
        w = s.build_worldline()
        zgrid = free_zgrid(ini, L, s.grid)
        shift = w.z_of_t(t_mean)
        Z = pattern_Zgrid(-shift, half_env, alpha, s.pattern_grid)
        pat = _simulate_total(ini, spectrum, w, s.method, zgrid, Z)
        shift_ref = -shift

    result = {"pattern": pat.to_dict(), "t_mean": float(t_mean)}
    if fringe is not None:
        rep = fit_visibility(pat, fringe.wavenumber,
                             window_periods=s.fit.window_periods,
                             t_mean=t_mean, z_reference=shift_ref)
        result["visibility"] = _report_dict(rep)
        result["alpha"] = fringe.wavenumber
    return result


# ---------------------------------------------------------------------------
# experiment: visibility-curve
# ---------------------------------------------------------------------------

def _curve_row(s: Scenario, ini, spectrum, w, fringe, t: float,
               zgrid, psi_fin) -> dict:
    k0 = ini.k0
    L = s.geometry.L
    try:
        spec_t = spectrum.shifted_to_mean(k0 * t / L)
    except ValueError as e:
        raise ScenarioError(
            f"sweep point t={t:g} leaves the valid spectrum regime: {e}")
    shift = w.z_of_t(t)
    half_env, _, _ = _envelope(ini, L)
    Z = pattern_Zgrid(-shift, half_env, fringe.wavenumber, s.pattern_grid)
    pat = _simulate_total(ini, spec_t, w, s.method, zgrid, Z, psi_fin=psi_fin)
    rep = fit_visibility(pat, fringe.wavenumber,
                         window_periods=s.fit.window_periods,
                         t_mean=t, z_reference=-shift)
    _, phases = dephasing_phase(spec_t, fringe, w, k0, L)
    ph = phasor_visibility(spec_t, phases, t_mean=t)
    try:
        st = short_time_visibility(spec_t, fringe, w, t).visibility
    except Exception:
        st = None  # expansion invalid at this t
    return {"t": float(t), "V_fit": rep.visibility, "V_shorttime": st,
            "V_phasor": ph.visibility, "phi": rep.phase}


def run_visibility_curve(s: Scenario) -> dict:
    ini = s.build_initial_state()
    spectrum = s.build_spectrum()
    w = s.build_worldline()
    fringe = _fringe(s)
    if fringe is None:
        raise ScenarioError("visibility-curve requires a double-slit initial state")
    L = s.geometry.L
    zgrid = free_zgrid(ini, L, s.grid)
    psi_fin = final_packet(ini, L, zgrid) if s.method == "shifted" else None
    ts = np.linspace(s.sweep.t_min, s.sweep.t_max, s.sweep.points)
    rows = [_curve_row(s, ini, spectrum, w, fringe, t, zgrid, psi_fin)
            for t in ts]
    return {"rows": rows, "alpha": fringe.wavenumber,
            "worldline": w.describe(), "spectrum": spectrum.describe()}


# ---------------------------------------------------------------------------
# experiment: tau-dec
# ---------------------------------------------------------------------------

def run_tau_dec(s: Scenario) -> dict:
    ini = s.build_initial_state()
    spectrum = s.build_spectrum()
    w = s.build_worldline()
    dz = abs(s.initial_state.z1 - s.initial_state.z2)
    tau = thermal_decoherence_time(spectrum.n_dof, spectrum.kbt, abs(w.accel), dz)
    sweep = s.sweep
    if sweep is None:
        ts = np.linspace(0.25 * tau, 1.5 * tau, 11)
    else:
        ts = np.linspace(sweep.t_min, sweep.t_max, sweep.points)
    fringe = _fringe(s)
    if fringe is None:
        raise ScenarioError("tau-dec requires a double-slit initial state")
    L = s.geometry.L
    zgrid = free_zgrid(ini, L, s.grid)
    psi_fin = final_packet(ini, L, zgrid) if s.method == "shifted" else None
    rows = [_curve_row(s, ini, spectrum, w, fringe, t, zgrid, psi_fin)
            for t in ts]
    v = np.array([r["V_fit"] for r in rows])
    t_arr = np.array([r["t"] for r in rows])
    target = np.exp(-1.0)
    if v.min() > target or v.max() < target:
        crossing = None
    else:
        # V is monotone decreasing over the sweep; interpolate t(V)
        order = np.argsort(v)
        crossing = float(np.interp(target, v[order], t_arr[order]))
    return {"tau_dec_analytic": float(tau),
            "tau_dec_simulated": crossing,
            "relative_error": (abs(crossing - tau) / tau
                               if crossing is not None else None),
            "rows": rows, "alpha": fringe.wavenumber,
            "spectrum": spectrum.describe()}


# ---------------------------------------------------------------------------
# experiment: revival
# ---------------------------------------------------------------------------

def run_revival(s: Scenario) -> dict:
    ini = s.build_initial_state()
    spectrum = s.build_spectrum()
    w = s.build_worldline()
    fringe = _fringe(s)
    if fringe is None:
        raise ScenarioError("revival requires a double-slit initial state")
    L = s.geometry.L
    k0 = ini.k0
    try:
        t_rev = find_revival(spectrum, fringe, w, k0, L)
    except ValueError as e:
        raise ScenarioError(str(e))
    out = {"t_revival": float(t_rev), "alpha": fringe.wavenumber,
           "spectrum": spectrum.describe(), "always_visible": t_rev == 0.0}
    if t_rev == 0.0:
        return out
    zgrid = free_zgrid(ini, L, s.grid)
    psi_fin = final_packet(ini, L, zgrid) if s.method == "shifted" else None
    for label, t in (("at_revival", t_rev), ("at_half_revival", 0.5 * t_rev)):
        row = _curve_row(s, ini, spectrum, w, fringe, t, zgrid, psi_fin)
        out[label] = {"t": row["t"], "V_fit": row["V_fit"],
                      "V_phasor": row["V_phasor"]}
    return out


# ---------------------------------------------------------------------------
# experiment: frame-equivalence
# ---------------------------------------------------------------------------

def run_frame_equivalence(s: Scenario) -> dict:
    ini = s.build_initial_state()
    spectrum = s.build_spectrum()
    model_cfg = s.build_gravity()
    if model_cfg.kind != "eep":
        raise ScenarioError("frame-equivalence requires the eep gravity kind")
    fringe = _fringe(s)
    if fringe is None:
        raise ScenarioError("frame-equivalence requires a double-slit initial state")
    L = s.geometry.L
    k0 = ini.k0
    g_z = model_cfg.g[2]
    half_env, _, _ = _envelope(ini, L)
    ts = np.linspace(s.sweep.t_min, s.sweep.t_max, s.sweep.points)
    checks = []
    for t in ts:
        try:
            spec_t = spectrum.shifted_to_mean(k0 * t / L)
        except ValueError as e:
            raise ScenarioError(
                f"sweep point t={t:g} leaves the valid spectrum regime: {e}")
        zg_free = free_zgrid(ini, L, s.grid)
        zg_lab = lab_zgrid(ini, spec_t, model_cfg, L)
        shift = 0.5 * abs(g_z) * t ** 2
        Z = pattern_Zgrid(-shift if g_z > 0 else shift, half_env,
                          fringe.wavenumber, s.pattern_grid)
        checks.append(frame_equivalence_check(
            ini, spec_t, model_cfg.g, L, zg_free, zg_lab, Z, fringe))
    return {"checks": checks,
            "pass": bool(all(c["pass"] for c in checks)),
            "g": [float(c) for c in model_cfg.g],
            "spectrum": spectrum.describe()}


# ---------------------------------------------------------------------------
# dispatch and output files
# ---------------------------------------------------------------------------

_RUNNERS = {
    "pattern": run_pattern,
    "visibility-curve": run_visibility_curve,
    "tau-dec": run_tau_dec,
    "revival": run_revival,
    "frame-equivalence": run_frame_equivalence,
}


def run_experiment(s: Scenario) -> dict:
    return _RUNNERS[s.experiment](s)


def write_outputs(result: dict, experiment: str, output_dir: str) -> list[str]:
    """Write the experiment's CSV/JSON files; returns the paths written."""
    os.makedirs(output_dir, exist_ok=True)
    written = []

    def emit_json(name: str, payload: dict):
        path = os.path.join(output_dir, name)
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=2)
        written.append(path)

    if experiment == "pattern":
        path = os.path.join(output_dir, "pattern.csv")
        write_pattern_csv(result["pattern"], path)
        written.append(path)
        emit_json("pattern.json", result)
    elif experiment in ("visibility-curve", "tau-dec"):
        path = os.path.join(output_dir, "visibility_curve.csv")
        write_visibility_curve_csv(result["rows"], path)
        written.append(path)
        name = "tau_dec.json" if experiment == "tau-dec" else "visibility_curve.json"
        emit_json(name, result)
    elif experiment == "revival":
        emit_json("revival.json", result)
    else:
        emit_json("frame_equivalence.json", result)
    return written


def run_scenario(s: Scenario, output_dir: str) -> tuple[dict, list[str]]:
    result = run_experiment(s)
    files = write_outputs(result, s.experiment, output_dir)
    return result, files
